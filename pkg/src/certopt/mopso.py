"""Constrained multiobjective particle swarm with a crowding-truncated Pareto archive.

Constraint handling uses feasibility dominance: a feasible point beats an
infeasible one, two infeasible points are ranked by total violation
``sum(max(0, g_j))`` and two feasible points by Pareto dominance. Every
evaluation the swarm makes is appended to a :class:`PopulationHistory`.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .data import read_csv, write_csv
from .doe import make_rng
from .problems import Evaluation

Evaluator = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


class Dominance(IntEnum):
    B_DOMINATES = -1
    NEITHER = 0
    A_DOMINATES = 1


class SurrogateNaNError(RuntimeError):
    def __init__(self, iteration: int, particle: int, x: np.ndarray):
        self.iteration, self.particle, self.x = iteration, particle, x
        super().__init__(
            f"non-finite surrogate output at iteration {iteration}, particle {particle}, x={x.tolist()}"
        )


def violation(g) -> np.ndarray | float:
    """Total constraint violation; zero means feasible."""
    g = np.asarray(g, dtype=float)
    return np.sum(np.maximum(g, 0.0), axis=-1)


def pareto_dominates(fa, fb) -> bool:
    fa, fb = np.asarray(fa), np.asarray(fb)
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def feasibility_dominates(a: Evaluation, b: Evaluation) -> Dominance:
    if len(a.f) != len(b.f) or len(a.g) != len(b.g):
        raise ValueError(
            f"arity mismatch: ({len(a.f)}, {len(a.g)}) vs ({len(b.f)}, {len(b.g)})"
        )
    va, vb = violation(a.g), violation(b.g)
    if va == 0 and vb == 0:
        if pareto_dominates(a.f, b.f):
            return Dominance.A_DOMINATES
        if pareto_dominates(b.f, a.f):
            return Dominance.B_DOMINATES
        return Dominance.NEITHER
    if va < vb:
        return Dominance.A_DOMINATES
    if vb < va:
        return Dominance.B_DOMINATES
    return Dominance.NEITHER


def _dominance_against(f, v, F, V) -> tuple[np.ndarray, np.ndarray]:
    """Masks (candidate dominates member, member dominates candidate) for every row."""
    both_feasible = (V == 0) & (v == 0)
    le = np.all(f <= F, axis=1)
    lt = np.any(f < F, axis=1)
    ge = np.all(F <= f, axis=1)
    gt = np.any(F < f, axis=1)
    cand_wins = np.where(both_feasible, le & lt, v < V)
    member_wins = np.where(both_feasible, ge & gt, V < v)
    return cand_wins, member_wins


def crowding_distance(front) -> np.ndarray:
    """Crowding distance of each row of ``front`` (objective vectors).

    Per objective, an interior point accumulates the gap between its two
    sorted neighbours divided by that objective's range; the extreme points
    get ``inf``. Exact duplicates are scored on the de-duplicated front and
    then every extra copy (and every copy of an interior duplicate) gets 0.
    """
    F = np.atleast_2d(np.asarray(front, dtype=float))
    n, m = F.shape
    if n == 0:
        raise ValueError("crowding distance of an empty front")
    uniq, first, inverse = np.unique(F, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    k = len(uniq)
    d = np.zeros(k)
    if k <= 2:
        d[:] = np.inf
    else:
        for j in range(m):
            order = np.argsort(uniq[:, j], kind="stable")
            col = uniq[order, j]
            span = col[-1] - col[0]
            d[order[0]] = d[order[-1]] = np.inf
            if span > 0:
                d[order[1:-1]] += (col[2:] - col[:-2]) / span
    out = d[inverse]
    counts = np.bincount(inverse, minlength=k)
    for u in np.flatnonzero(counts > 1):
        copies = np.flatnonzero(inverse == u)
        if np.isinf(d[u]):
            out[copies[copies != first[u]]] = 0.0
        else:
            out[copies] = 0.0
    return out


class ParetoArchive:
    """Mutually non-dominated (under feasibility dominance) evaluated points."""

    def __init__(self, dim: int, n_objectives: int, n_constraints: int, capacity: float = 200):
        if capacity < 1:
            raise ValueError("archive capacity must be at least 1")
        self.capacity = capacity
        self.x = np.empty((0, dim))
        self.f = np.empty((0, n_objectives))
        self.g = np.empty((0, n_constraints))
        self.v = np.empty(0)
        self.origin = np.empty((0, 2), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.x)

    def insert(self, x, f, g, origin=(-1, -1)) -> bool:
        """Offer one point; returns whether it entered the archive."""
        x = np.asarray(x, dtype=float)
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        if f.shape != (self.f.shape[1],) or g.shape != (self.g.shape[1],) or x.shape != (self.x.shape[1],):
            raise ValueError("candidate arities do not match the archive")
        v = float(violation(g))
        if len(self):
            cand_wins, member_wins = _dominance_against(f, v, self.f, self.v)
            if member_wins.any() or np.any(np.all(self.x == x, axis=1)):
                return False
            keep = ~cand_wins
            self.x, self.f, self.g = self.x[keep], self.f[keep], self.g[keep]
            self.v, self.origin = self.v[keep], self.origin[keep]
        self.x = np.vstack([self.x, x])
        self.f = np.vstack([self.f, f])
        self.g = np.vstack([self.g, g])
        self.v = np.append(self.v, v)
        self.origin = np.vstack([self.origin, np.asarray(origin, dtype=np.int64)])
        if len(self) > self.capacity:
            drop = int(np.argmin(crowding_distance(self.f)))
            keep = np.arange(len(self)) != drop
            self.x, self.f, self.g = self.x[keep], self.f[keep], self.g[keep]
            self.v, self.origin = self.v[keep], self.origin[keep]
        return True

    @property
    def feasible(self) -> np.ndarray:
        return self.v == 0

    def table(self) -> np.ndarray:
        return np.hstack([self.origin, self.x, self.f, self.g])

    def to_csv(self, path: str | Path) -> None:
        write_csv(path, _header(self.x.shape[1], self.f.shape[1], self.g.shape[1]), self.table(), n_int=2)

    @classmethod
    def from_csv(cls, path: str | Path, dim: int, n_objectives: int, capacity: float = np.inf) -> ParetoArchive:
        header, table = read_csv(path)
        n_con = len(header) - 2 - dim - n_objectives
        arch = cls(dim, n_objectives, n_con, capacity)
        arch.origin = table[:, :2].astype(np.int64)
        arch.x = table[:, 2:2 + dim]
        arch.f = table[:, 2 + dim:2 + dim + n_objectives]
        arch.g = table[:, 2 + dim + n_objectives:]
        arch.v = violation(arch.g) if n_con else np.zeros(len(table))
        return arch

    def is_mutually_nondominated(self) -> bool:
        for i in range(len(self)):
            cand_wins, _ = _dominance_against(self.f[i], self.v[i], self.f, self.v)
            if cand_wins.any():
                return False
        return True


def _header(dim: int, m: int, c: int) -> list[str]:
    return (["iter", "particle"] + [f"x{i + 1}" for i in range(dim)]
            + [f"f{i + 1}" for i in range(m)] + [f"g{i + 1}" for i in range(c)])


@dataclass
class PopulationHistory:
    """Every evaluation made by the swarm, in evaluation order."""

    iteration: np.ndarray
    particle: np.ndarray
    x: np.ndarray
    f: np.ndarray
    g: np.ndarray

    @property
    def count(self) -> int:
        return len(self.iteration)

    def __len__(self) -> int:
        return self.count

    def to_csv(self, path: str | Path) -> None:
        table = np.hstack([self.iteration[:, None], self.particle[:, None], self.x, self.f, self.g])
        write_csv(path, _header(self.x.shape[1], self.f.shape[1], self.g.shape[1]), table, n_int=2)

    @classmethod
    def from_csv(cls, path: str | Path) -> PopulationHistory:
        header, table = read_csv(path)
        dim = sum(h.startswith("x") for h in header)
        m = sum(h.startswith("f") for h in header)
        return cls(
            iteration=table[:, 0].astype(np.int64),
            particle=table[:, 1].astype(np.int64),
            x=table[:, 2:2 + dim],
            f=table[:, 2 + dim:2 + dim + m],
            g=table[:, 2 + dim + m:],
        )


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 100
    iterations: int = 100
    inertia: float = 0.7
    c1: float = 1.5
    c2: float = 1.5
    seed: int = 0
    capacity: int = 200

    def __post_init__(self):
        if self.swarm_size < 2 or self.iterations < 1:
            raise ValueError("need swarm_size >= 2 and iterations >= 1")
        if not 0.0 <= self.inertia <= 1.0:
            raise ValueError("inertia must lie in [0, 1]")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("c1 and c2 must be positive")
        if self.capacity < 1:
            raise ValueError("capacity must be at least 1")


def _checked(evaluate: Evaluator, x: np.ndarray, it: int) -> tuple[np.ndarray, np.ndarray]:
    f, g = evaluate(x)
    f = np.asarray(f, dtype=float).reshape(len(x), -1)
    g = np.asarray(g, dtype=float).reshape(len(x), -1)
    bad = ~(np.all(np.isfinite(f), axis=1) & np.all(np.isfinite(g), axis=1))
    if bad.any():
        p = int(np.flatnonzero(bad)[0])
        raise SurrogateNaNError(it, p, x[p])
    return f, g


def run(evaluate: Evaluator, bounds, config: PsoConfig | None = None) -> tuple[ParetoArchive, PopulationHistory]:
    """Minimize the objectives returned by ``evaluate`` inside ``bounds``.

    ``evaluate`` maps an ``(n, dim)`` batch to ``(F, G)``. Particles start
    uniformly in the box with zero velocity. Each iteration, in particle
    order, a leader is picked from the archive by a binary tournament on
    crowding distance, the velocity becomes
    ``w*v + c1*r1*(pbest - x) + c2*r2*(leader - x)``, and the position is
    clipped to the box with the velocity zeroed on clipped coordinates.
    """
    cfg = config or PsoConfig()
    bounds = np.asarray(bounds, dtype=float)
    lo, hi = bounds[:, 0], bounds[:, 1]
    dim, n = len(bounds), cfg.swarm_size
    rng = make_rng(cfg.seed)

    x = lo + rng.random((n, dim)) * (hi - lo)
    vel = np.zeros((n, dim))
    f, g = _checked(evaluate, x, 0)
    m, c = f.shape[1], g.shape[1]

    total = n * cfg.iterations
    hist = PopulationHistory(
        iteration=np.repeat(np.arange(cfg.iterations), n),
        particle=np.tile(np.arange(n), cfg.iterations),
        x=np.empty((total, dim)),
        f=np.empty((total, m)),
        g=np.empty((total, c)),
    )
    archive = ParetoArchive(dim, m, c, cfg.capacity)
    pbest_x, pbest_f, pbest_g = x.copy(), f.copy(), g.copy()

    def record(it):
        rows = slice(it * n, (it + 1) * n)
        hist.x[rows], hist.f[rows], hist.g[rows] = x, f, g
        for p in range(n):
            archive.insert(x[p], f[p], g[p], origin=(it, p))

    record(0)
    for it in range(1, cfg.iterations):
        crowd = crowding_distance(archive.f)
        size = len(archive)
        for p in range(n):
            a, b = rng.integers(size), rng.integers(size)
            leader = archive.x[a if crowd[a] >= crowd[b] else b]
            r1, r2 = rng.random(dim), rng.random(dim)
            vel[p] = (cfg.inertia * vel[p] + cfg.c1 * r1 * (pbest_x[p] - x[p])
                      + cfg.c2 * r2 * (leader - x[p]))
            new = x[p] + vel[p]
            clipped = (new < lo) | (new > hi)
            x[p] = np.clip(new, lo, hi)
            vel[p, clipped] = 0.0
        f, g = _checked(evaluate, x, it)
        record(it)
        for p in range(n):
            verdict = feasibility_dominates(
                Evaluation(x[p], f[p], g[p]), Evaluation(pbest_x[p], pbest_f[p], pbest_g[p])
            )
            coin = rng.random()
            if verdict == Dominance.A_DOMINATES or (verdict == Dominance.NEITHER and coin < 0.5):
                pbest_x[p], pbest_f[p], pbest_g[p] = x[p], f[p], g[p]
    return archive, hist
