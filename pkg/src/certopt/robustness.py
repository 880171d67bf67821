"""Robustness certification of a surrogate-based optimization run.

A statistically sized subsample of the optimizer's evaluated population is
re-evaluated with the rigorous oracle. For each objective the signed sum of
deviations ``rb = sum_i (f_i - h_i)`` (rigorous minus surrogate) is compared
with a tolerance: the objective passes when ``|rb| <= epsilon``.

The sample size follows the proportion formula
``Np = z**2 * sigma * (1 - sigma) / E**2`` with an optional finite
population correction ``Np / (1 + (Np - 1) / N)``.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .doe import lhs_subsample
from .mopso import ParetoArchive, PopulationHistory
from .problems import Problem

POPULATIONS = ("history", "feasible", "front")


class InsufficientPopulationError(ValueError):
    pass


def zscore_for(confidence: float) -> float:
    """Two-sided standard normal critical value for ``confidence``."""
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    return NormalDist().inv_cdf(1.0 - (1.0 - confidence) / 2.0)


@dataclass(frozen=True)
class SampleSizeSpec:
    zscore: float = 2.576
    sigma: float = 0.5
    E: float = 0.066
    finite_population: int | None = None

    def __post_init__(self):
        if self.zscore <= 0:
            raise ValueError("zscore must be positive")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if self.E <= 0:
            raise ValueError("E must be positive")
        if self.finite_population is not None and self.finite_population < 1:
            raise ValueError("finite_population must be a positive count")


def sample_size(spec: SampleSizeSpec) -> int:
    """Minimum number of population members to re-evaluate (at least one)."""
    raw = spec.zscore**2 * spec.sigma * (1.0 - spec.sigma) / spec.E**2
    # guard against e.g. 384.00000000000006 rounding up a whole sample
    np_ = math.ceil(raw - 1e-9)
    if spec.finite_population is not None:
        N = spec.finite_population
        np_ = math.ceil(np_ / (1.0 + (np_ - 1) / N) - 1e-9)
    return max(1, np_)


def compute_rb(rigorous, surrogate) -> tuple[float, float]:
    """Signed deviation sum and mean absolute deviation of paired values.

    The sum is exactly rounded (``math.fsum``), so it does not depend on
    summation order.
    """
    f = np.asarray(rigorous, dtype=float).ravel()
    h = np.asarray(surrogate, dtype=float).ravel()
    if f.shape != h.shape:
        raise ValueError(f"{f.size} rigorous values but {h.size} surrogate values")
    if f.size == 0:
        raise ValueError("compute_rb needs at least one pair")
    d = f - h
    if not np.all(np.isfinite(d)):
        raise ValueError("non-finite deviation")
    return math.fsum(d.tolist()), math.fsum(np.abs(d).tolist()) / d.size


@dataclass(frozen=True)
class RobustnessConfig:
    epsilon: float = 0.05
    confidence: float = 0.99
    spec: SampleSizeSpec = field(default_factory=SampleSizeSpec)
    normalize: bool = True
    population: str = "history"
    subsample: str = "lhs"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")
        if self.population not in POPULATIONS:
            raise ValueError(f"population must be one of {POPULATIONS}")

    @classmethod
    def from_confidence(cls, confidence: float = 0.99, sigma: float = 0.5, E: float = 0.066,
                        finite_population: int | None = None, **kwargs) -> RobustnessConfig:
        spec = SampleSizeSpec(zscore_for(confidence), sigma, E, finite_population)
        return cls(confidence=confidence, spec=spec, **kwargs)


@dataclass
class ObjectiveResult:
    rb: float
    mae: float
    np: int
    passed: bool

    def to_dict(self) -> dict:
        return {"rb": self.rb, "mae": self.mae, "np": self.np, "pass": self.passed}


@dataclass
class RobustnessReport:
    problem: str
    epsilon: float
    confidence: float
    np: int
    spec: SampleSizeSpec
    per_objective: list[ObjectiveResult]
    sample_indices: list[int]
    seed: int
    normalized: bool
    scales: list[list[float]] | None
    population: str
    population_size: int
    subsample: str
    source: str
    rule: str = "|rb| <= epsilon"

    @property
    def verdict(self) -> bool:
        return all(o.passed for o in self.per_objective)

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "epsilon": self.epsilon,
            "confidence": self.confidence,
            "np": self.np,
            "spec": {"z": self.spec.zscore, "sigma": self.spec.sigma, "E": self.spec.E,
                     "N": self.spec.finite_population},
            "per_objective": [o.to_dict() for o in self.per_objective],
            "sample_indices": list(self.sample_indices),
            "seed": self.seed,
            "normalized": self.normalized,
            "scales": self.scales,
            "population": self.population,
            "population_size": self.population_size,
            "subsample": self.subsample,
            "source": self.source,
            "rule": self.rule,
            "verdict": "pass" if self.verdict else "fail",
        }

    @classmethod
    def from_dict(cls, d: dict) -> RobustnessReport:
        s = d["spec"]
        return cls(
            problem=d["problem"], epsilon=d["epsilon"], confidence=d["confidence"], np=d["np"],
            spec=SampleSizeSpec(s["z"], s["sigma"], s["E"], s["N"]),
            per_objective=[ObjectiveResult(o["rb"], o["mae"], o["np"], o["pass"])
                           for o in d["per_objective"]],
            sample_indices=d["sample_indices"], seed=d["seed"], normalized=d["normalized"],
            scales=d["scales"], population=d["population"], population_size=d["population_size"],
            subsample=d["subsample"], source=d["source"], rule=d.get("rule", "|rb| <= epsilon"),
        )

    def summary(self) -> str:
        lines = [f"{'objective':<10} {'Rb':>12} {'MAE':>12} {'Np':>5}  verdict"]
        for j, o in enumerate(self.per_objective, start=1):
            lines.append(f"f{j:<9} {o.rb:>12.6g} {o.mae:>12.6g} {o.np:>5}  "
                         f"{'pass' if o.passed else 'FAIL'}")
        lines.append(f"epsilon={self.epsilon:g} rule: {self.rule}; overall: "
                     f"{'pass' if self.verdict else 'FAIL'}")
        return "\n".join(lines)


def certify(
    history: PopulationHistory,
    rigorous: Problem | Callable[[np.ndarray], np.ndarray],
    config: RobustnessConfig | None = None,
    seed: int = 0,
    scales=None,
    archive: ParetoArchive | None = None,
    problem_name: str | None = None,
) -> RobustnessReport:
    """Certify an optimization run against a rigorous source.

    Args:
        history: every evaluation the optimizer made, with surrogate outputs.
        rigorous: a :class:`Problem` or a callable mapping ``(n, dim)`` inputs
            to ``(n, m)`` rigorous objective values.
        config: tolerance, sample-size parameters and population options.
        seed: seed of the LHS subsample.
        scales: per-objective ``(lo, hi)`` used to normalize deviations;
            defaults to the range of the population's surrogate objectives.
        archive: required when ``config.population == "front"``.

    Raises:
        InsufficientPopulationError: when the population holds fewer than Np members.
    """
    config = config or RobustnessConfig()
    if history.count == 0:
        raise InsufficientPopulationError("population history is empty")

    if config.population == "front":
        if archive is None:
            raise ValueError("population='front' needs the Pareto archive")
        x, h = archive.x, archive.f
    elif config.population == "feasible":
        keep = np.all(history.g <= 0, axis=1) if history.g.shape[1] else np.ones(history.count, bool)
        x, h = history.x[keep], history.f[keep]
    else:
        x, h = history.x, history.f

    n_p = sample_size(config.spec)
    if n_p > len(x):
        raise InsufficientPopulationError(
            f"certification needs {n_p} samples but the {config.population} population has "
            f"only {len(x)}; run the optimizer with a larger swarm or more iterations"
        )
    idx = lhs_subsample(x, n_p, seed, method=config.subsample)

    if isinstance(rigorous, Problem):
        f = rigorous.evaluate(x[idx])[0]
        source = f"oracle:{rigorous.name}"
        name = problem_name or rigorous.name
    else:
        f = np.asarray(rigorous(x[idx]), dtype=float).reshape(len(idx), -1)
        source = getattr(rigorous, "source", "callable")
        name = problem_name or "unknown"
    hs = h[idx]
    if f.shape != hs.shape:
        raise ValueError(f"rigorous source returned shape {f.shape}, expected {hs.shape}")

    if config.normalize:
        if scales is None:
            lo, hi = h.min(axis=0), h.max(axis=0)
        else:
            sc = np.asarray(scales, dtype=float)
            lo, hi = sc[:, 0], sc[:, 1]
        span = np.where(hi > lo, hi - lo, 1.0)
        f = (f - lo) / span
        hs = (hs - lo) / span
        scales_out = np.column_stack([lo, hi]).tolist()
    else:
        scales_out = None

    results = []
    for j in range(hs.shape[1]):
        rb, mae = compute_rb(f[:, j], hs[:, j])
        results.append(ObjectiveResult(rb=rb, mae=mae, np=n_p, passed=abs(rb) <= config.epsilon))
    return RobustnessReport(
        problem=name, epsilon=config.epsilon, confidence=config.confidence, np=n_p,
        spec=config.spec, per_objective=results, sample_indices=[int(i) for i in idx],
        seed=seed, normalized=config.normalize, scales=scales_out,
        population=config.population, population_size=len(x), subsample=config.subsample,
        source=source,
    )


def hypervolume(points, reference) -> float:
    """Exact dominated hypervolume of ``points`` (minimization) up to ``reference``.

    Two objectives use a sweep; more objectives are sliced along the last
    objective and the slices measured recursively.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    ref = np.asarray(reference, dtype=float)
    if P.shape[1] != ref.shape[0]:
        raise ValueError("reference point dimension does not match the front")
    if np.any(P > ref):
        raise ValueError("reference point must be weakly dominated by every front member")
    return _hv(P, ref)


def _hv(P: np.ndarray, ref: np.ndarray) -> float:
    if len(P) == 0:
        return 0.0
    m = P.shape[1]
    if m == 1:
        return float(ref[0] - P[:, 0].min())
    if m == 2:
        order = np.lexsort((P[:, 1], P[:, 0]))
        area, best = 0.0, ref[1]
        for f1, f2 in P[order]:
            if f2 < best:
                area += (ref[0] - f1) * (best - f2)
                best = f2
        return float(area)
    order = np.argsort(P[:, -1], kind="stable")
    P = P[order]
    levels = P[:, -1]
    total = 0.0
    for i in range(len(P)):
        upper = levels[i + 1] if i + 1 < len(P) else ref[-1]
        if upper > levels[i]:
            total += _hv(P[: i + 1, :-1], ref[:-1]) * (upper - levels[i])
    return float(total)


def generational_distance(front_a, front_b, scale=None) -> float:
    """Mean distance from each member of ``front_a`` to its nearest member of ``front_b``.

    Objectives are divided by ``scale`` spans (rows of ``(lo, hi)``) first;
    without a scale the joint range of both fronts is used.
    """
    A = np.atleast_2d(np.asarray(front_a, dtype=float))
    B = np.atleast_2d(np.asarray(front_b, dtype=float))
    span = _span(A, B, scale)
    d = np.sqrt((((A[:, None, :] - B[None, :, :]) / span) ** 2).sum(axis=-1))
    return float(d.min(axis=1).mean())


def _span(A, B, scale) -> np.ndarray:
    if scale is None:
        both = np.vstack([A, B])
        lo, hi = both.min(axis=0), both.max(axis=0)
    else:
        sc = np.asarray(scale, dtype=float)
        lo, hi = sc[:, 0], sc[:, 1]
    return np.where(hi > lo, hi - lo, 1.0)


def front_agreement(front_a, front_b, reference=None, scale=None) -> dict:
    """Generational distance of ``front_a`` to ``front_b`` and both hypervolumes.

    Without an explicit ``reference`` the point ``max + 0.1 * span`` over
    both fronts is used.
    """
    A = np.atleast_2d(np.asarray(front_a, dtype=float))
    B = np.atleast_2d(np.asarray(front_b, dtype=float))
    if A.size == 0 or B.size == 0:
        raise ValueError("fronts must be non-empty")
    if A.shape[1] != B.shape[1]:
        raise ValueError("fronts have different numbers of objectives")
    if reference is None:
        reference = np.vstack([A, B]).max(axis=0) + 0.1 * _span(A, B, scale)
    reference = np.asarray(reference, dtype=float)
    hv_a, hv_b = hypervolume(A, reference), hypervolume(B, reference)
    return {
        "generational_distance": generational_distance(A, B, scale),
        "hypervolume_a": hv_a,
        "hypervolume_b": hv_b,
        "hypervolume_ratio": hv_a / hv_b if hv_b > 0 else float("nan"),
        "reference": reference.tolist(),
    }


__all__ = [
    "SampleSizeSpec", "RobustnessConfig", "RobustnessReport", "ObjectiveResult",
    "InsufficientPopulationError", "sample_size", "compute_rb", "certify", "zscore_for",
    "hypervolume", "generational_distance", "front_agreement",
]
