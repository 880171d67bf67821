"""Datasets of oracle samples and their CSV/JSON persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .doe import lhs_sample, make_rng, scale_to_bounds
from .problems import Problem


@dataclass
class Dataset:
    """Input/output samples in problem units.

    ``y`` columns follow ``y_names`` (``f1..fm`` then ``g1..gc`` for
    generated data). ``bounds`` is the input box used for normalization.
    """

    x: np.ndarray
    y: np.ndarray
    x_names: list[str]
    y_names: list[str]
    bounds: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim == 1:
            self.y = self.y[:, None]
        if len(self.x) != len(self.y):
            raise ValueError(f"{len(self.x)} input rows but {len(self.y)} output rows")
        if len(self.x) == 0:
            raise ValueError("dataset is empty")
        if self.x.shape[1] != len(self.x_names) or self.y.shape[1] != len(self.y_names):
            raise ValueError("column names do not match array widths")
        if self.bounds is not None:
            self.bounds = np.asarray(self.bounds, dtype=float)

    def __len__(self) -> int:
        return len(self.x)

    @property
    def columns(self) -> list[str]:
        return self.x_names + self.y_names

    def target(self, name: str) -> np.ndarray:
        if name not in self.y_names:
            raise KeyError(
                f"target column {name!r} not found; available: {', '.join(self.y_names)}"
            )
        return self.y[:, self.y_names.index(name)]

    def select(self, name: str) -> Dataset:
        """Single-output view used for MISO training."""
        return Dataset(self.x, self.target(name), self.x_names, [name], self.bounds)

    def to_csv(self, path: str | Path) -> None:
        table = np.hstack([self.x, self.y])
        write_csv(path, self.columns, table)

    @classmethod
    def from_csv(cls, path: str | Path, bounds=None) -> Dataset:
        header, table = read_csv(path)
        n_in = sum(1 for h in header if h.startswith("x"))
        return cls(table[:, :n_in], table[:, n_in:], header[:n_in], header[n_in:], bounds)


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def split_indices(n: int, val_fraction: float, test_fraction: float, seed: int) -> Split:
    """Shuffled train/validation/test partition of ``range(n)``."""
    if not (0 < val_fraction < 1 and 0 < test_fraction < 1 and val_fraction + test_fraction < 1):
        raise ValueError("fractions must lie in (0, 1) and sum to less than 1")
    perm = make_rng(seed).permutation(n)
    n_val = max(1, int(round(val_fraction * n)))
    n_test = max(1, int(round(test_fraction * n)))
    if n - n_val - n_test < 1:
        raise ValueError(f"{n} samples are too few for a three-way split")
    return Split(
        train=np.sort(perm[n_val + n_test:]),
        val=np.sort(perm[:n_val]),
        test=np.sort(perm[n_val:n_val + n_test]),
    )


def generate_dataset(problem: Problem, n: int, seed: int) -> Dataset:
    """LHS inputs scaled to the problem box and labelled by the oracle."""
    x = scale_to_bounds(lhs_sample(n, problem.dim, seed), problem.bounds)
    y = problem.evaluate_outputs(x)
    names = problem.column_names
    return Dataset(x, y, names[: problem.dim], names[problem.dim:], problem.bounds)


def write_csv(path: str | Path, header: list[str], table: np.ndarray, n_int: int = 0) -> None:
    """Write a numeric table; the first ``n_int`` columns are written as integers."""
    # repr() is the shortest string that round-trips a double exactly
    lines = [",".join(header)]
    for row in np.atleast_2d(table):
        ints = [str(int(v)) for v in row[:n_int]]
        lines.append(",".join(ints + [repr(float(v)) for v in row[n_int:]]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    text = Path(path).read_text().splitlines()
    header = text[0].strip().split(",")
    rows = [[float(v) for v in line.split(",")] for line in text[1:] if line.strip()]
    table = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, table


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path: str | Path):
    return json.loads(Path(path).read_text())
