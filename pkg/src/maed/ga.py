"""Real-coded genetic algorithm baseline.

Tournament selection, BLX-alpha crossover, Gaussian mutation and elitism.
Candidates go through the same objective as ESOA (clamp, zone repair,
balance repair, penalized cost), so traces of the two engines compare
like for like.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constraints import DispatchObjective, PenaltyWeights
from .model import DecisionVector, ProblemInstance, Tolerances, evaluate, validate_instance
from .trace import RunTrace, SolveResult, Tracker

__all__ = ["GaConfig", "blx_crossover", "tournament", "minimize", "ga_solve"]


@dataclass(frozen=True)
class GaConfig:
    pop_size: int = 50
    tournament_k: int = 3
    crossover_rate: float = 0.9
    blend_alpha: float = 0.5
    p_mut: Optional[float] = None  # None -> 1/D
    sigma_mut: float = 0.1  # fraction of each variable's range
    elitism_count: int = 2
    max_iters: int = 100
    seed: int = 0
    penalty: PenaltyWeights = field(default_factory=PenaltyWeights)

    def __post_init__(self):
        if self.pop_size < 4:
            raise ValueError("pop_size must be at least 4")
        if not 1 <= self.tournament_k <= self.pop_size:
            raise ValueError("tournament_k must lie in [1, pop_size]")
        for name in ("crossover_rate", "p_mut"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0 <= self.elitism_count < self.pop_size:
            raise ValueError("elitism_count must be smaller than pop_size")
        if self.blend_alpha < 0 or self.sigma_mut < 0 or self.max_iters < 0:
            raise ValueError("blend_alpha, sigma_mut and max_iters must be non-negative")


def tournament(fitness: np.ndarray, n: int, k: int, rng) -> np.ndarray:
    """Indices of ``n`` winners of size-``k`` tournaments (lower fitness wins)."""
    entrants = rng.integers(0, fitness.size, size=(n, k))
    return entrants[np.arange(n), np.argmin(fitness[entrants], axis=1)]


def blx_crossover(x1, x2, alpha: float, rng):
    """Two BLX-alpha children, uniform on the parents' box widened by ``alpha``."""
    lo, hi = np.minimum(x1, x2), np.maximum(x1, x2)
    span = hi - lo
    a, b = lo - alpha * span, hi + alpha * span
    return a + rng.random(np.shape(x1)) * (b - a), a + rng.random(np.shape(x1)) * (b - a)


def minimize(objective, config: GaConfig) -> tuple[np.ndarray, RunTrace]:
    rng = np.random.default_rng(config.seed)
    lb, ub = objective.lb, objective.ub
    dim, n = lb.size, config.pop_size
    p_mut = 1.0 / dim if config.p_mut is None else config.p_mut
    sigma = config.sigma_mut * (ub - lb)

    X = objective.prepare(lb + rng.random((n, dim)) * (ub - lb))
    scores = objective.score(X, 0)
    tracker = Tracker(objective)
    tracker.offer(X, scores)
    tracker.record(0)
    fit = scores.fitness

    for it in range(1, config.max_iters + 1):
        fit = objective.score(X, it).fitness  # weights escalate per iteration
        n_kids = n - config.elitism_count
        n_pairs = (n_kids + 1) // 2
        parents = tournament(fit, 2 * n_pairs, config.tournament_k, rng).reshape(n_pairs, 2)
        p1, p2 = X[parents[:, 0]], X[parents[:, 1]]
        c1, c2 = blx_crossover(p1, p2, config.blend_alpha, rng)
        cross = rng.random(n_pairs) < config.crossover_rate
        c1 = np.where(cross[:, None], c1, p1)
        c2 = np.where(cross[:, None], c2, p2)
        kids = np.concatenate([c1, c2])[:n_kids]
        mask = rng.random(kids.shape) < p_mut
        kids = kids + mask * rng.normal(0.0, 1.0, kids.shape) * sigma
        kids = objective.prepare(kids)
        kid_scores = objective.score(kids, it)
        tracker.offer(kids, kid_scores)

        elite = np.argsort(fit, kind="stable")[: config.elitism_count]
        X = np.concatenate([X[elite], kids])
        fit = np.concatenate([fit[elite], kid_scores.fitness])
        tracker.record(it)
    return tracker.best_point(), tracker.trace


def ga_solve(instance: ProblemInstance, config: GaConfig = GaConfig(),
             tolerances: Tolerances = Tolerances()) -> SolveResult:
    errs = validate_instance(instance)
    if errs:
        raise ValueError(f"invalid instance {instance.name!r}: " + "; ".join(errs))
    objective = DispatchObjective(instance, config.penalty, tolerances)
    x, trace = minimize(objective, config)
    dv = DecisionVector.from_flat(instance, x)
    return SolveResult(dv, evaluate(instance, dv, tolerances), trace)
