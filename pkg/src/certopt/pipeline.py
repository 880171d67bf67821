"""Stage functions shared by the CLI and the experiment scripts."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import mopso
from .data import Dataset, generate_dataset
from .problems import Problem
from .robustness import RobustnessConfig, certify, front_agreement
from .surrogate import (LossHistory, MlpModel, RegressionMetrics, TrainConfig, evaluate,
                        fit, prepare)
from .tuner import HyperbandPlan, SearchResult, SearchSpace, run_search

log = logging.getLogger(__name__)

# Best structures reported for each benchmark; unlabelled table rows are
# assigned to objectives in row order.
DEFAULT_ARCHITECTURES: dict[str, dict[str, tuple[int, ...]]] = {
    "binh_korn": {name: (2, 60, 60, 60, 1) for name in ("f1", "f2", "g1", "g2")},
    "zdt3": {"f1": (3, 100, 1), "f2": (3, 80, 80, 80, 80, 80, 1)},
    "dtlz2": {
        "f1": (3, 180, 180, 180, 180, 180, 1),
        "f2": (3, 220, 220, 220, 220, 220, 1),
        "f3": (3, 220, 220, 1),
    },
}


def default_widths(problem: Problem, output: str) -> tuple[int, ...]:
    try:
        return DEFAULT_ARCHITECTURES[problem.name][output]
    except KeyError:
        return (problem.dim, 60, 60, 60, 1)


@dataclass
class TrainedOutput:
    model: MlpModel
    history: LossHistory
    test: RegressionMetrics
    search: SearchResult | None = None
    seconds: float = 0.0


def train_output(
    dataset: Dataset,
    target: str,
    widths,
    config: TrainConfig,
    tune: tuple[SearchSpace, HyperbandPlan, int] | None = None,
) -> TrainedOutput:
    """Fit (optionally after a Hyperband search) one model for ``target``."""
    t0 = time.perf_counter()
    search = None
    if tune is not None:
        space, plan, hb_seed = tune
        search = run_search(space, dataset, plan, hb_seed, target=target, base_config=config)
        widths, config = search.widths, search.config
    model, history = fit(dataset, widths, config, target=target)
    prepared = prepare(dataset, config, target)
    test = evaluate(model, dataset.x[prepared.test], dataset.target(target)[prepared.test])
    return TrainedOutput(model, history, test, search, time.perf_counter() - t0)


def train_all(
    dataset: Dataset,
    problem: Problem,
    config: TrainConfig,
    widths: dict[str, tuple[int, ...]] | None = None,
    threads: int = 1,
    tune: tuple[SearchSpace, HyperbandPlan, int] | None = None,
) -> dict[str, TrainedOutput]:
    """One MISO model per objective and constraint column, trained in column order.

    Each output gets its own seed (``config.seed + column index``).
    """
    from dataclasses import replace

    jobs = []
    for k, name in enumerate(dataset.y_names):
        w = (widths or {}).get(name) or default_widths(problem, name)
        jobs.append((name, w, replace(config, seed=config.seed + k)))

    def work(job):
        name, w, cfg = job
        out = train_output(dataset, name, w, cfg, tune)
        log.info("trained %s %s: test mae=%.3g in %.1fs", name, w, out.test.mae, out.seconds)
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]
    return {job[0]: res for job, res in zip(jobs, results)}


@dataclass
class SurrogateSet:
    """Objective and constraint models evaluated together as an optimizer oracle."""

    objectives: list[MlpModel]
    constraints: list[MlpModel] = field(default_factory=list)
    source: str = "surrogate"

    @classmethod
    def from_models(cls, models: dict[str, MlpModel], problem: Problem) -> SurrogateSet:
        names = problem.output_names
        missing = [n for n in names if n not in models]
        if missing:
            raise ValueError(f"{problem.name} needs models for {names}; missing {missing}")
        extra = [n for n in models if n not in names]
        if extra:
            raise ValueError(f"models {extra} do not belong to {problem.name} ({names})")
        for n in names:
            if models[n].widths[0] != problem.dim:
                raise ValueError(f"model {n} takes {models[n].widths[0]} inputs, "
                                 f"{problem.name} has {problem.dim}")
        objs = [models[f"f{i + 1}"] for i in range(problem.n_objectives)]
        cons = [models[f"g{i + 1}"] for i in range(problem.n_constraints)]
        return cls(objs, cons)

    def __call__(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.atleast_2d(x)
        f = np.column_stack([m.predict(x) for m in self.objectives])
        g = (np.column_stack([m.predict(x) for m in self.constraints])
             if self.constraints else np.empty((len(x), 0)))
        return f, g

    def objective_values(self, x: np.ndarray) -> np.ndarray:
        return self(x)[0]

    def objective_scales(self) -> list[list[float]]:
        return [[float(m.y_norm.lo[0]), float(m.y_norm.hi[0])] for m in self.objectives]


def _feasible_front(archive: mopso.ParetoArchive) -> np.ndarray:
    front = archive.f[archive.feasible]
    return front if len(front) else archive.f


def compare_fronts(
    surrogate_archive: mopso.ParetoArchive,
    rigorous_archive: mopso.ParetoArchive,
    problem: Problem,
    scales,
) -> dict:
    """Front agreement of the surrogate-optimized front against the rigorous one.

    Reported twice: with the surrogate's own predictions for its front, and
    with that front's decision vectors re-evaluated by the oracle.
    """
    sur = _feasible_front(surrogate_archive)
    rig = _feasible_front(rigorous_archive)
    x_sur = surrogate_archive.x[surrogate_archive.feasible] if surrogate_archive.feasible.any() \
        else surrogate_archive.x
    reeval = problem.evaluate(x_sur)[0]
    both = np.vstack([sur, rig, reeval])
    span = np.asarray(scales, dtype=float)
    span = np.where(span[:, 1] > span[:, 0], span[:, 1] - span[:, 0], 1.0)
    reference = both.max(axis=0) + 0.1 * span
    predicted = front_agreement(sur, rig, reference=reference, scale=scales)
    reevaluated = front_agreement(reeval, rig, reference=reference, scale=scales)
    return {"predicted": predicted, "reevaluated": reevaluated,
            "n_surrogate_front": len(sur), "n_rigorous_front": len(rig)}


__all__ = [
    "DEFAULT_ARCHITECTURES", "default_widths", "TrainedOutput", "train_output", "train_all",
    "SurrogateSet", "compare_fronts", "generate_dataset", "certify", "RobustnessConfig",
]
