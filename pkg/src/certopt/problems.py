"""Analytical benchmark oracles used as the rigorous source of information.

Each benchmark is exposed twice: a scalar ``eval_*`` function returning an
:class:`Evaluation` for one point, and a :class:`Problem` descriptor whose
``evaluate`` method works on whole ``(n, dim)`` batches. Constraints follow
the ``g(x) <= 0`` feasibility convention.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

DTLZ2_FORMS = ("paper", "standard")


class DomainError(ValueError):
    """Raised when an oracle is evaluated outside its variable bounds."""


class UnknownProblemError(LookupError):
    pass


@dataclass(frozen=True)
class Evaluation:
    x: np.ndarray
    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        for name in ("x", "f", "g"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}: {arr}")


BatchFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class Problem:
    """Descriptor of a benchmark: arities, box bounds and a batch oracle.

    Attributes:
        name: Registry identifier.
        dim: Number of decision variables.
        n_objectives: Number of objectives (all minimized).
        n_constraints: Number of inequality constraints ``g_j(x) <= 0``.
        bounds: ``(dim, 2)`` array of ``[lo, hi]`` rows.
        func: Vectorized oracle mapping ``(n, dim)`` inputs to ``(F, G)``.
    """

    name: str
    dim: int
    n_objectives: int
    n_constraints: int
    bounds: np.ndarray
    func: BatchFn = field(repr=False, compare=False)

    def __post_init__(self):
        bounds = np.asarray(self.bounds, dtype=float)
        if self.dim < 1 or self.n_objectives < 1 or self.n_constraints < 0:
            raise ValueError(f"invalid arities for problem {self.name!r}")
        if bounds.shape != (self.dim, 2):
            raise ValueError(f"bounds must have shape ({self.dim}, 2), got {bounds.shape}")
        if not np.all(bounds[:, 0] < bounds[:, 1]):
            raise ValueError(f"every bound needs lo < hi, got {bounds.tolist()}")
        object.__setattr__(self, "bounds", bounds)

    @property
    def lower(self) -> np.ndarray:
        return self.bounds[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.bounds[:, 1]

    @property
    def column_names(self) -> list[str]:
        """CSV header convention ``x1..xd, f1..fm, g1..gc``."""
        return (
            [f"x{i + 1}" for i in range(self.dim)]
            + [f"f{i + 1}" for i in range(self.n_objectives)]
            + [f"g{i + 1}" for i in range(self.n_constraints)]
        )

    @property
    def output_names(self) -> list[str]:
        return self.column_names[self.dim:]

    def check_bounds(self, x: np.ndarray) -> None:
        x = np.atleast_2d(x)
        if x.shape[1] != self.dim:
            raise ValueError(f"{self.name} expects {self.dim} variables, got {x.shape[1]}")
        for j, (lo, hi) in enumerate(self.bounds):
            col = x[:, j]
            if np.any(col < lo) or np.any(col > hi) or np.any(np.isnan(col)):
                bad = float(col[(col < lo) | (col > hi) | np.isnan(col)][0])
                side = "lower" if bad < lo else "upper"
                limit = lo if bad < lo else hi
                raise DomainError(
                    f"{self.name}: x{j + 1}={bad!r} violates the {side} bound {limit!r} "
                    f"(domain {lo} <= x{j + 1} <= {hi})"
                )

    def evaluate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate a batch; returns ``F`` of shape (n, m) and ``G`` of shape (n, c)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        self.check_bounds(x)
        return self.func(x)

    def evaluate_outputs(self, x: np.ndarray) -> np.ndarray:
        """Objectives and constraints stacked column-wise, in ``output_names`` order."""
        f, g = self.evaluate(x)
        return np.hstack([f, g])

    def evaluate_one(self, x) -> Evaluation:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise ValueError("evaluate_one expects a single input vector")
        f, g = self.evaluate(x[None, :])
        return Evaluation(x=x.copy(), f=f[0], g=g[0])


def _binh_korn(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x1, x2 = x[:, 0], x[:, 1]
    f1 = 4.0 * x1**2 + 4.0 * x2**2
    f2 = (x1 - 5.0) ** 2 + (x2 - 5.0) ** 2
    g1 = (x1 - 5.0) ** 2 + x2**2 - 25.0
    g2 = -((x1 - 8.0) ** 2) - (x2 + 3.0) ** 2 + 7.7
    return np.column_stack([f1, f2]), np.column_stack([g1, g2])


def _zdt3(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Three-variable form with auxiliary 1 + (9/29) * (x2 + x3).
    x1 = x[:, 0]
    gaux = 1.0 + (9.0 / 29.0) * (x[:, 1] + x[:, 2])
    ratio = x1 / gaux
    f2 = gaux * (1.0 - np.sqrt(ratio) - ratio * np.sin(10.0 * np.pi * x1))
    return np.column_stack([x1, f2]), np.empty((len(x), 0))


def _dtlz2(x: np.ndarray, form: str) -> tuple[np.ndarray, np.ndarray]:
    # G sums over all three variables in both forms.
    G = np.sum((x - 0.5) ** 2, axis=1)
    c1, s1 = np.cos(x[:, 0] * np.pi / 2), np.sin(x[:, 0] * np.pi / 2)
    c2, s2 = np.cos(x[:, 1] * np.pi / 2), np.sin(x[:, 1] * np.pi / 2)
    f1 = (1.0 + G) * c1 * c2
    if form == "paper":
        f1 = f1 * np.sin(x[:, 2] * np.pi / 2)
    f2 = (1.0 + G) * c1 * s2
    f3 = (1.0 + G) * s1
    return np.column_stack([f1, f2, f3]), np.empty((len(x), 0))


def binh_korn() -> Problem:
    return Problem("binh_korn", 2, 2, 2, np.array([[0.0, 5.0], [0.0, 3.0]]), _binh_korn)


def zdt3() -> Problem:
    return Problem("zdt3", 3, 2, 0, np.array([[0.0, 1.0]] * 3), _zdt3)


def dtlz2(form: str = "paper") -> Problem:
    if form not in DTLZ2_FORMS:
        raise ValueError(f"dtlz2 form must be one of {DTLZ2_FORMS}, got {form!r}")
    return Problem(
        "dtlz2", 3, 3, 0, np.array([[0.0, 1.0]] * 3), lambda x: _dtlz2(x, form)
    )


_REGISTRY: dict[str, Callable[..., Problem]] = {
    "binh_korn": binh_korn,
    "zdt3": zdt3,
    "dtlz2": dtlz2,
}


def available_problems() -> list[str]:
    return sorted(_REGISTRY)


def registry_lookup(name: str, dtlz2_form: str = "paper") -> Problem:
    """Return the registered problem called ``name``.

    ``dtlz2_form`` only affects ``dtlz2`` and selects between the printed
    objective (extra ``sin(x3*pi/2)`` factor on f1) and the textbook one.
    """
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {name!r}; available: {', '.join(available_problems())}"
        ) from None
    if name == "dtlz2":
        return factory(dtlz2_form)
    return factory()


def eval_binh_korn(x) -> Evaluation:
    return binh_korn().evaluate_one(x)


def eval_zdt3_paper(x) -> Evaluation:
    return zdt3().evaluate_one(x)


def eval_dtlz2_paper(x, form: str = "paper") -> Evaluation:
    return dtlz2(form).evaluate_one(x)
