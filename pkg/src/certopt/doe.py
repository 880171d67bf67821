"""Latin Hypercube Sampling, correlation diagnostics and population subsampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; the same seed yields the same stream on every platform."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class LhsPlan:
    n: int
    dim: int
    seed: int
    points: np.ndarray  # (n, dim) in [0, 1)


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: list[str]
    r: np.ndarray
    constant_columns: list[str] = field(default_factory=list)


def lhs_sample(n: int, dim: int, seed: int) -> LhsPlan:
    """Draw a plain Latin Hypercube design in the unit cube.

    Every column holds exactly one value in each stratum ``[k/n, (k+1)/n)``.
    Rows are assigned to strata by an independent random permutation per
    column and the position inside a stratum is uniform.
    """
    if n < 1 or dim < 1:
        raise ValueError(f"lhs_sample needs n >= 1 and dim >= 1, got n={n}, dim={dim}")
    rng = make_rng(seed)
    points = np.empty((n, dim))
    for d in range(dim):
        strata = rng.permutation(n)
        jitter = rng.random(n)
        lo = strata / n
        hi = (strata + 1) / n
        u = lo + jitter * (hi - lo)
        # rounding can land exactly on the upper edge of a stratum
        points[:, d] = np.where(u >= hi, np.nextafter(hi, 0.0), u)
    return LhsPlan(n=n, dim=dim, seed=seed, points=points)


def scale_to_bounds(plan: LhsPlan | np.ndarray, bounds) -> np.ndarray:
    """Affine map from the unit cube to ``bounds`` (rows of ``[lo, hi]``)."""
    unit = plan.points if isinstance(plan, LhsPlan) else np.atleast_2d(np.asarray(plan, float))
    bounds = np.asarray(bounds, dtype=float)
    if bounds.ndim != 2 or bounds.shape[1] != 2 or unit.shape[1] != bounds.shape[0]:
        raise ValueError(
            f"plan has {unit.shape[1]} dimensions but {len(bounds)} bounds were given"
        )
    lo, hi = bounds[:, 0], bounds[:, 1]
    return np.minimum(lo + unit * (hi - lo), hi)


def unscale_from_bounds(x: np.ndarray, bounds) -> np.ndarray:
    bounds = np.asarray(bounds, dtype=float)
    lo, hi = bounds[:, 0], bounds[:, 1]
    return (np.asarray(x, float) - lo) / (hi - lo)


def correlation_matrix(data: np.ndarray, labels: list[str] | None = None) -> CorrelationMatrix:
    """Pearson correlation between every pair of columns.

    A zero-variance column has no defined correlation; it is reported with
    ``r = 0`` against every column (itself included) and listed in
    ``constant_columns``.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError("correlation_matrix needs at least 2 rows of 2-D data")
    m = data.shape[1]
    labels = list(labels) if labels is not None else [f"c{i + 1}" for i in range(m)]
    if len(labels) != m:
        raise ValueError(f"{len(labels)} labels for {m} columns")

    centered = data - data.mean(axis=0)
    norms = np.sqrt(np.sum(centered**2, axis=0))
    constant = norms == 0.0
    safe = np.where(constant, 1.0, norms)
    r = (centered.T @ centered) / np.outer(safe, safe)
    r = np.clip(r, -1.0, 1.0)
    r[constant, :] = 0.0
    r[:, constant] = 0.0
    idx = np.flatnonzero(~constant)
    r[idx, idx] = 1.0
    return CorrelationMatrix(
        labels=labels, r=r, constant_columns=[labels[i] for i in np.flatnonzero(constant)]
    )


def lhs_subsample(
    positions: np.ndarray, k: int, seed: int, method: str = "lhs"
) -> np.ndarray:
    """Pick ``k`` distinct rows of ``positions`` without replacement.

    With ``method="lhs"`` a ``k``-point Latin Hypercube is laid over the
    bounding box of the population and each design point claims its nearest
    unclaimed member (Euclidean distance in box-normalized coordinates),
    in design-row order. ``method="uniform"`` draws a plain random subset.

    Returns:
        Integer indices into ``positions``, in selection order.
    """
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    n = positions.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"cannot draw k={k} members from a population of {n}")
    if method == "uniform":
        return make_rng(seed).choice(n, size=k, replace=False)
    if method != "lhs":
        raise ValueError(f"unknown subsampling method {method!r}")

    lo = positions.min(axis=0)
    span = positions.max(axis=0) - lo
    span[span == 0.0] = 1.0
    unit = (positions - lo) / span
    design = lhs_sample(k, positions.shape[1], seed).points

    claimed = np.zeros(n, dtype=bool)
    chosen = np.empty(k, dtype=np.int64)
    for i, target in enumerate(design):
        d2 = np.sum((unit - target) ** 2, axis=1)
        d2[claimed] = np.inf
        j = int(np.argmin(d2))
        claimed[j] = True
        chosen[i] = j
    return chosen
