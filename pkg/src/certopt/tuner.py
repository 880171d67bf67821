"""Hyperband search over network depth, width, learning rate and batch size.

Training epochs are the budgeted resource. Survivors of a successive-halving
round keep their optimizer state and simply continue training, so a
configuration that reaches ``r_i`` epochs has been trained exactly ``r_i``
epochs in total.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset
from .doe import make_rng
from .surrogate import TrainConfig, TrainingDivergedError, make_trainer, prepare


class SearchFailedError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchSpace:
    depth_choices: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    width_choices: tuple[int, ...] = tuple(range(20, 241, 20))
    lr_choices: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    batch_choices: tuple[int, ...] = (32,)

    def __post_init__(self):
        for name in ("depth_choices", "width_choices", "lr_choices", "batch_choices"):
            values = getattr(self, name)
            if len(values) == 0:
                raise ValueError(f"{name} must not be empty")
            if min(values) <= 0:
                raise ValueError(f"{name} must hold positive values")

    @property
    def size(self) -> int:
        return (len(self.depth_choices) * len(self.width_choices)
                * len(self.lr_choices) * len(self.batch_choices))


@dataclass(frozen=True)
class Candidate:
    depth: int
    width: int
    lr: float
    batch: int

    def widths(self, n_inputs: int) -> tuple[int, ...]:
        return (n_inputs,) + (self.width,) * self.depth + (1,)

    def key(self) -> str:
        blob = json.dumps([self.depth, self.width, self.lr, self.batch])
        return hashlib.sha1(blob.encode()).hexdigest()


@dataclass(frozen=True)
class Bracket:
    s: int
    n0: int
    r0: float
    rounds: tuple[tuple[int, int], ...]  # (configs, epochs) per round


@dataclass(frozen=True)
class HyperbandPlan:
    R: int
    eta: int
    brackets: tuple[Bracket, ...]

    @property
    def s_max(self) -> int:
        return len(self.brackets) - 1


def _int_log(R: int, eta: int) -> int:
    s = 0
    while eta ** (s + 1) <= R:
        s += 1
    return s


def make_plan(R: int, eta: int = 3) -> HyperbandPlan:
    """Bracket schedule of Hyperband for maximum resource ``R`` and rate ``eta``.

    Bracket ``s`` starts ``n = ceil((s_max+1) * eta**s / (s+1))`` configurations
    at ``R * eta**-s`` epochs; each round keeps ``floor(n_i/eta)`` of them
    (at least one) and multiplies the epochs by ``eta`` (floored to whole epochs).
    """
    if eta < 2:
        raise ValueError(f"eta must be >= 2, got {eta}")
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    s_max = _int_log(R, eta)
    brackets = []
    for s in range(s_max, -1, -1):
        n = math.ceil((s_max + 1) * eta**s / (s + 1))
        r = R / eta**s
        rounds = []
        n_i = n
        for i in range(s + 1):
            # exact floor of R * eta**(i - s); never exceeds the real-valued budget
            rounds.append((n_i, (R * eta**i) // eta**s))
            n_i = max(1, n_i // eta)
        brackets.append(Bracket(s=s, n0=n, r0=r, rounds=tuple(rounds)))
    return HyperbandPlan(R=R, eta=eta, brackets=tuple(brackets))


@dataclass
class LeaderboardEntry:
    candidate: Candidate
    bracket: int
    epochs_trained: int
    val_mse: float
    widths: tuple[int, ...] = ()
    rank: int = 0

    def to_dict(self) -> dict:
        return {
            "widths": list(self.widths),
            "lr": self.candidate.lr,
            "batch": self.candidate.batch,
            "epochs_trained": self.epochs_trained,
            "val_mse": self.val_mse if math.isfinite(self.val_mse) else None,
            "rank": self.rank,
            "bracket": self.bracket,
        }


@dataclass
class SearchResult:
    best: LeaderboardEntry
    config: TrainConfig
    widths: tuple[int, ...]
    leaderboard: list[LeaderboardEntry] = field(default_factory=list)
    rounds: list[dict] = field(default_factory=list)


class Runner:
    """Resumable evaluation of one candidate: ``advance(epochs)`` returns the current loss."""

    def advance(self, total_epochs: int) -> float:  # pragma: no cover - interface
        raise NotImplementedError

    @property
    def epochs_trained(self) -> int:  # pragma: no cover - interface
        raise NotImplementedError


def hyperband(
    plan: HyperbandPlan,
    sample: Callable[[np.random.Generator], Candidate],
    make_runner: Callable[[Candidate, int], Runner],
    seed: int,
) -> tuple[list[LeaderboardEntry], list[dict]]:
    """Run every bracket of ``plan``; returns leaderboard entries and a round log."""
    rng = make_rng(seed)
    entries: list[LeaderboardEntry] = []
    log: list[dict] = []
    serial = 0
    for bracket in plan.brackets:
        n0 = bracket.rounds[0][0]
        candidates = [sample(rng) for _ in range(n0)]
        runners = []
        for c in candidates:
            runners.append(make_runner(c, serial))
            serial += 1
        alive = list(range(n0))
        for i, (_, epochs) in enumerate(bracket.rounds):
            losses = {}
            for j in alive:
                try:
                    losses[j] = runners[j].advance(epochs)
                except TrainingDivergedError:
                    losses[j] = math.inf
                if not math.isfinite(losses[j]):
                    losses[j] = math.inf
            order = sorted(alive, key=lambda j: (losses[j], candidates[j].key(), j))
            keep = max(1, len(alive) // plan.eta) if i < len(bracket.rounds) - 1 else len(alive)
            log.append({"bracket": bracket.s, "round": i, "epochs": epochs,
                        "evaluated": len(alive), "kept": keep})
            for j in alive:
                if j not in order[:keep] or i == len(bracket.rounds) - 1:
                    entries.append(LeaderboardEntry(candidates[j], bracket.s,
                                                    runners[j].epochs_trained, losses[j]))
            alive = order[:keep]
    entries.sort(key=lambda e: (e.val_mse, e.candidate.key(), -e.epochs_trained))
    for rank, e in enumerate(entries, start=1):
        e.rank = rank
    return entries, log


class _TrainerRunner(Runner):
    def __init__(self, prepared, widths, config, name):
        self.trainer = make_trainer(prepared, widths, config, name=name)

    def advance(self, total_epochs: int) -> float:
        extra = total_epochs - self.trainer.epoch
        if extra > 0:
            self.trainer.train(extra)
        return self.trainer.best_val

    @property
    def epochs_trained(self) -> int:
        return self.trainer.epoch


def run_search(
    space: SearchSpace,
    dataset: Dataset,
    plan: HyperbandPlan,
    seed: int,
    target: str | None = None,
    base_config: TrainConfig | None = None,
) -> SearchResult:
    """Hyperband over ``space`` for one output of ``dataset``.

    Candidates are ranked by their best validation MSE so far. The winner's
    widths and a :class:`TrainConfig` carrying its learning rate and batch
    size are returned for a final full-budget fit.

    Raises:
        SearchFailedError: when every sampled configuration diverged.
    """
    base = base_config or TrainConfig()
    prepared = prepare(dataset, base, target)
    n_in = dataset.x.shape[1]

    def sample(rng: np.random.Generator) -> Candidate:
        return Candidate(
            depth=int(space.depth_choices[rng.integers(len(space.depth_choices))]),
            width=int(space.width_choices[rng.integers(len(space.width_choices))]),
            lr=float(space.lr_choices[rng.integers(len(space.lr_choices))]),
            batch=int(space.batch_choices[rng.integers(len(space.batch_choices))]),
        )

    def make_runner(c: Candidate, serial: int) -> Runner:
        # the split is fixed by `prepared`; the seed only drives init and batching
        cfg = replace(base, learning_rate=c.lr, batch_size=c.batch, seed=base.seed + 1000 + serial)
        return _TrainerRunner(prepared, c.widths(n_in), cfg, target or "")

    entries, log = hyperband(plan, sample, make_runner, seed)
    for e in entries:
        e.widths = e.candidate.widths(n_in)
    finite = [e for e in entries if math.isfinite(e.val_mse)]
    if not finite:
        raise SearchFailedError(
            f"all {len(entries)} sampled configurations diverged; rounds: {log}"
        )
    best = finite[0]
    config = replace(base, learning_rate=best.candidate.lr, batch_size=best.candidate.batch)
    return SearchResult(best=best, config=config, widths=best.widths, leaderboard=entries, rounds=log)
