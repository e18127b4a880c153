"""Constraint handling: box clamping, prohibited-zone repair, balance repair
and penalized fitness.

Candidates are clamped and zone-repaired before evaluation, then nudged
towards per-area balance. Whatever imbalance survives the repair (tie limits,
zones, exhausted headroom) is left to the penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (BatchEvaluation, DecisionVector, EvaluationReport, Generator,
                    ProblemInstance, Tolerances, _batch_losses, _batch_residual, evaluate_batch)
from .objective import Scores

__all__ = [
    "PenaltyWeights",
    "clamp_bounds",
    "repair_poz",
    "penalized_fitness",
    "clamp_batch",
    "repair_batch",
    "balance_batch",
    "penalized_fitness_batch",
    "DispatchObjective",
]

ESCALATION_CAP = 1e6


@dataclass(frozen=True)
class PenaltyWeights:
    w_balance: float = 1e3
    w_poz: float = 1e4
    w_bound: float = 1e4
    escalation: float = 1.01

    def __post_init__(self):
        if min(self.w_balance, self.w_poz, self.w_bound) <= 0:
            raise ValueError("penalty weights must be positive")
        if self.escalation < 1:
            raise ValueError("escalation must be >= 1")

    def balance_weight(self, iteration: int) -> float:
        log_factor = max(iteration, 0) * math.log(self.escalation)
        if log_factor >= math.log(ESCALATION_CAP):
            return self.w_balance * ESCALATION_CAP
        return self.w_balance * math.exp(log_factor)


def clamp_bounds(instance: ProblemInstance, dv: DecisionVector) -> DecisionVector:
    tb = instance.tables
    return DecisionVector(np.clip(dv.p, tb.p_min, tb.p_max), np.clip(dv.t, -tb.tie_cap, tb.tie_cap))


def repair_poz(gen: Generator, p: float) -> float:
    """Move ``p`` out of a prohibited zone to the nearer edge (ties go low)."""
    for zone in gen.poz:
        if zone.low < p < zone.up:
            return zone.low if p - zone.low <= zone.up - p else zone.up
    return p


def penalized_fitness(report: EvaluationReport, weights: PenaltyWeights, iteration: int = 0) -> float:
    """Cost plus quadratic penalties; a report flagged feasible scores its bare cost."""
    if report.feasible:
        return float(report.cost)
    return float(_penalty_sum(report.cost, report.balance_residual[None, :],
                              report.poz_excess[None, :], report.bound_excess[None, :],
                              report.tie_excess[None, :], weights, iteration)[0])


def _penalty_sum(cost, residual, poz, bound, tie, weights: PenaltyWeights, iteration: int):
    # tie excess shares the bound weight; clamping normally makes it zero
    return (cost
            + weights.balance_weight(iteration) * np.square(residual).sum(axis=1)
            + weights.w_poz * np.square(poz).sum(axis=1)
            + weights.w_bound * (np.square(bound).sum(axis=1) + np.square(tie).sum(axis=1)))


def penalized_fitness_batch(ev: BatchEvaluation, weights: PenaltyWeights, iteration: int = 0,
                            feasible: np.ndarray | None = None) -> np.ndarray:
    fit = _penalty_sum(ev.cost, ev.balance_residual, ev.poz_excess, ev.bound_excess,
                       ev.tie_excess, weights, iteration)
    if feasible is not None:
        fit = np.where(feasible, ev.cost, fit)
    return fit


def clamp_batch(instance: ProblemInstance, X: np.ndarray) -> np.ndarray:
    """Clamp rows of flat vectors ``[p..., t...]`` into the box."""
    return np.clip(X, instance.lower_bounds(), instance.upper_bounds())


def repair_batch(instance: ProblemInstance, X: np.ndarray) -> np.ndarray:
    """Apply :func:`repair_poz` to every generator entry of every row."""
    tb = instance.tables
    X = np.array(X, dtype=float, copy=True)
    if tb.poz_low.shape[1] == 0:
        return X
    G = instance.n_gen
    P = X[:, :G]
    for z in range(tb.poz_low.shape[1]):
        lo, up = tb.poz_low[:, z], tb.poz_up[:, z]
        with np.errstate(invalid="ignore"):
            inside = (P > lo) & (P < up)
            to_low = (P - lo) <= (up - P)
        P = np.where(inside, np.where(to_low, lo, up), P)
    X[:, :G] = P
    return X


def _residual(tb, P, T):
    return _batch_residual(tb, P, T, _batch_losses(tb, P))


def balance_batch(instance: ProblemInstance, X: np.ndarray, passes: int = 3) -> np.ndarray:
    """Heuristic balance repair of clamped, zone-repaired rows.

    Each pass hands the system-wide imbalance to the unit with the most
    headroom in the needed direction, then shifts tie flows by the
    least-norm change that cancels the remaining area residuals. A final
    round spreads leftovers over each area's units in proportion to their
    headroom. Output stays inside the box and outside prohibited zones.
    """
    tb = instance.tables
    G = instance.n_gen
    X = repair_batch(instance, clamp_batch(instance, X))
    P, T = X[:, :G].copy(), X[:, G:].copy()
    C = tb.incidence
    C_pinv = np.linalg.pinv(C) if C.size else None
    rows = np.arange(P.shape[0])

    def route(P, T):
        if C_pinv is None:
            return T
        return np.clip(T + _residual(tb, P, T) @ C_pinv.T, -tb.tie_cap, tb.tie_cap)

    for _ in range(passes):
        total = _residual(tb, P, T).sum(axis=1)
        head = np.where(total[:, None] > 0, P - tb.p_min, tb.p_max - P)
        j = head.argmax(axis=1)
        P[rows, j] = np.clip(P[rows, j] - total, tb.p_min[j], tb.p_max[j])
        P = repair_batch(instance, np.hstack([P, T]))[:, :G]
        T = route(P, T)

    A = tb.membership
    for _ in range(passes):
        T = route(P, T)
        res = _residual(tb, P, T)[:, tb.area_of]
        down, up = P - tb.p_min, tb.p_max - P
        room_down = (down @ A.T)[:, tb.area_of]
        room_up = (up @ A.T)[:, tb.area_of]
        share = np.where(res > 0, down / np.maximum(room_down, 1e-12), up / np.maximum(room_up, 1e-12))
        P = np.clip(P - res * share, tb.p_min, tb.p_max)
        P = repair_batch(instance, np.hstack([P, T]))[:, :G]
    return np.hstack([P, T])


class DispatchObjective:
    """Box-bounded objective that ESOA and the GA both minimize.

    ``prepare`` maps raw candidates to clamped, zone-repaired (and, unless
    ``balance_repair`` is off, balance-repaired) vectors and ``score`` rates
    prepared vectors by penalized cost. Both engines go through this class
    only, so they share one evaluation path.
    """

    def __init__(self, instance: ProblemInstance, weights: PenaltyWeights = PenaltyWeights(),
                 tolerances: Tolerances = Tolerances(), balance_repair: bool = True):
        self.instance = instance
        self.balance_repair = balance_repair
        self.weights = weights
        self.tolerances = tolerances
        self.lb = instance.lower_bounds()
        self.ub = instance.upper_bounds()
        self.n_evals = 0

    @property
    def dim(self) -> int:
        return self.instance.dim

    def prepare(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.balance_repair:
            return balance_batch(self.instance, X)
        return repair_batch(self.instance, clamp_batch(self.instance, X))

    def evaluate(self, X: np.ndarray) -> BatchEvaluation:
        G = self.instance.n_gen
        return evaluate_batch(self.instance, X[:, :G], X[:, G:])

    def score(self, X: np.ndarray, iteration: int = 0) -> Scores:
        self.n_evals += X.shape[0]
        ev = self.evaluate(X)
        ok = ev.feasible(self.tolerances)
        return Scores(penalized_fitness_batch(ev, self.weights, iteration, ok), ev.cost, ok)

    def ties(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[self.instance.n_gen:]
