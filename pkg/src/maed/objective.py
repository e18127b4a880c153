"""Objective adapters consumed by the search engines.

An objective exposes box bounds ``lb``/``ub`` plus two batch methods:
``prepare`` (project raw candidates onto the admissible set) and ``score``
(fitness, raw cost and feasibility flags for prepared candidates).
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np


class Scores(NamedTuple):
    fitness: np.ndarray
    cost: np.ndarray
    feasible: np.ndarray


class BoxObjective:
    """Unconstrained test function on a box, e.g. ``BoxObjective(sphere, -5, 5, dim=5)``."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], lb, ub, dim: int | None = None):
        lb, ub = np.asarray(lb, dtype=float), np.asarray(ub, dtype=float)
        if dim is not None:
            lb, ub = np.broadcast_to(lb, (dim,)).copy(), np.broadcast_to(ub, (dim,)).copy()
        self.lb, self.ub = lb, ub
        self.func = func
        self.n_evals = 0

    @property
    def dim(self) -> int:
        return self.lb.size

    def prepare(self, X):
        return np.clip(X, self.lb, self.ub)

    def score(self, X, iteration: int = 0) -> Scores:
        self.n_evals += X.shape[0]
        f = np.asarray(self.func(X), dtype=float)
        return Scores(f, f, np.ones(f.shape, dtype=bool))

    def ties(self, x):
        return np.zeros(0)


def sphere(X: np.ndarray) -> np.ndarray:
    return np.square(X).sum(axis=-1)
