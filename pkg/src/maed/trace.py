"""Run bookkeeping shared by the search engines: incumbents, traces, results."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .model import DecisionVector, EvaluationReport


@dataclass
class RunTrace:
    """One row per iteration, row 0 being the initial population.

    ``best_cost`` is the cheapest *feasible* point seen so far (``inf`` until
    one turns up), so both numeric columns are non-increasing.
    ``ties`` holds the tie flows of the best-fitness incumbent.
    """

    iteration: list[int] = field(default_factory=list)
    best_fitness: list[float] = field(default_factory=list)
    best_cost: list[float] = field(default_factory=list)
    ties: list[np.ndarray] = field(default_factory=list)

    def __len__(self):
        return len(self.iteration)

    @property
    def n_ties(self) -> int:
        return len(self.ties[0]) if self.ties else 0

    def header(self) -> list[str]:
        return ["iter", "best_fitness", "best_cost"] + [f"tie_{k + 1}" for k in range(self.n_ties)]

    def rows(self):
        for i, fit, cost, t in zip(self.iteration, self.best_fitness, self.best_cost, self.ties):
            yield [i, fit, cost, *t.tolist()]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RunTrace":
        reader = csv.reader(io.StringIO(text))
        next(reader)
        tr = cls()
        for row in reader:
            tr.iteration.append(int(row[0]))
            tr.best_fitness.append(float(row[1]))
            tr.best_cost.append(float(row[2]))
            tr.ties.append(np.array([float(v) for v in row[3:]]))
        return tr


@dataclass
class SolveResult:
    best_vector: DecisionVector
    best_report: EvaluationReport
    trace: RunTrace


class Tracker:
    """Keeps the best-fitness and the cheapest feasible point seen during a run."""

    def __init__(self, objective):
        self.objective = objective
        self.trace = RunTrace()
        self.inc_x = None
        self.inc_fitness = np.inf
        self.feas_x = None
        self.feas_cost = np.inf

    def offer(self, X: np.ndarray, scores):
        k = int(np.argmin(scores.fitness))
        if scores.fitness[k] < self.inc_fitness:
            self.inc_fitness = float(scores.fitness[k])
            self.inc_x = X[k].copy()
        if scores.feasible.any():
            cost = np.where(scores.feasible, scores.cost, np.inf)
            k = int(np.argmin(cost))
            if cost[k] < self.feas_cost:
                self.feas_cost = float(cost[k])
                self.feas_x = X[k].copy()

    def record(self, iteration: int):
        self.trace.iteration.append(iteration)
        self.trace.best_fitness.append(self.inc_fitness)
        self.trace.best_cost.append(self.feas_cost)
        self.trace.ties.append(np.array(self.objective.ties(self.inc_x), dtype=float))

    def best_point(self) -> np.ndarray:
        return (self.feas_x if self.feas_x is not None else self.inc_x).copy()
