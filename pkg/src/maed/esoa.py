"""Electro Search optimization.

Each atom is a nucleus (incumbent point) with its own Rydberg energy ``re``
and accelerator ``ac`` coefficients. One iteration:

1. orbital transition: every atom scatters electrons at quantized orbit
   radii ``(1 - 1/n^2) r`` around its nucleus and keeps the best one;
2. nucleus relocation: the nucleus moves along
   ``(e_best - N_best) + re * (1/N_best^2 - 1/N_k^2)``, plus optional
   attraction to the best and repulsion from the worst nucleus;
3. mutation: sparse Gaussian kicks;
4. greedy acceptance, then the orbital tuner re-centres ``re``/``ac`` on the
   fitness-weighted centre of mass of the population.

The search runs in a normalized cube ``[1, 2]^D`` so the reciprocal-square
term is bounded and independent of the problem's units.

Three switches make the engine usable at a fixed budget, all on by default:
the orbit radius shrinks polynomially over the run (``radius_decay``), a
nucleus may take over its best electron when that beats the relocated
candidate (``adopt_electron``), and ``e_best`` in the relocation is the best
electron of the whole population rather than of each atom
(``shared_electron``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .constraints import DispatchObjective, PenaltyWeights
from .model import DecisionVector, ProblemInstance, Tolerances, evaluate, validate_instance
from .trace import RunTrace, SolveResult, Tracker

__all__ = [
    "NormalizedSpace",
    "Atom",
    "EngineConfig",
    "EsoaState",
    "orbit_radius",
    "orbit_position",
    "relocation_step",
    "spread_atoms",
    "orbital_transition",
    "nucleus_relocation",
    "mutate",
    "tune_coefficients",
    "init_state",
    "step",
    "minimize",
    "solve",
    "vanilla",
]


@dataclass(frozen=True)
class NormalizedSpace:
    """Affine map between the problem box ``[lb, ub]`` and ``[1, 2]^D``."""

    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        lb, ub = np.asarray(self.lb, dtype=float), np.asarray(self.ub, dtype=float)
        if lb.shape != ub.shape or not np.all(lb < ub):
            raise ValueError("NormalizedSpace needs lb < ub elementwise")
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @property
    def dim(self) -> int:
        return self.lb.size

    def to_problem(self, u):
        return self.lb + (np.asarray(u) - 1.0) * (self.ub - self.lb)

    def to_unit(self, x):
        return 1.0 + (np.asarray(x) - self.lb) / (self.ub - self.lb)


@dataclass
class Atom:
    nucleus: np.ndarray
    fitness: float
    re: float
    ac: float
    best_electron: Optional[np.ndarray] = None


@dataclass(frozen=True)
class EngineConfig:
    n_atoms: int = 50
    orbits: tuple[int, ...] = (2, 3, 4, 5)
    electrons_per_atom: int = 8
    r_frac: float = 0.3
    radius_decay: float = 3.0  # 0 keeps the radius constant
    alpha: float = 3.0
    p_mut: float = 0.05
    sigma_mut: float = 0.3
    adopt_electron: bool = True
    shared_electron: bool = True
    max_iters: int = 100
    seed: int = 0
    penalty: PenaltyWeights = field(default_factory=PenaltyWeights)
    re_max: float = 2.0
    ac_max: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "orbits", tuple(int(n) for n in self.orbits))
        if self.n_atoms < 3:
            raise ValueError("n_atoms must be at least 3")
        if not self.orbits or any(n < 2 for n in self.orbits):
            raise ValueError("orbit levels must be integers >= 2")
        if self.electrons_per_atom < 1:
            raise ValueError("electrons_per_atom must be positive")
        if not 0.0 <= self.p_mut <= 1.0:
            raise ValueError("p_mut must lie in [0, 1]")
        if self.r_frac <= 0 or self.sigma_mut < 0 or self.alpha < 0 or self.radius_decay < 0:
            raise ValueError("r_frac must be positive; sigma_mut, alpha and radius_decay non-negative")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")


# ------------------------------------------------------------------ formulas

def orbit_radius(config: EngineConfig, iteration: int) -> float:
    """Base radius at ``iteration``: ``r_frac * (1 - t/T)^radius_decay``, kept positive."""
    if config.radius_decay == 0 or config.max_iters == 0:
        return config.r_frac
    frac = min(iteration / config.max_iters, 1.0)
    return config.r_frac * (1.0 - frac) ** config.radius_decay + 1e-6


def orbit_position(nucleus, u, n, r):
    """Electron at orbit level ``n``: ``N + (2u - 1)(1 - 1/n^2) r``, before clamping."""
    return nucleus + (2.0 * u - 1.0) * (1.0 - 1.0 / np.square(n)) * r


def relocation_step(nucleus, best, worst, best_electron, re, ac, alpha, r1, r2):
    """New nucleus position before clamping.

    With ``alpha = 0`` this is the plain relocation
    ``N + ac * ((e_best - N_best) + re * (1/N_best^2 - 1/N^2))``.
    """
    d = (best_electron - best) + re * (1.0 / np.square(best) - 1.0 / np.square(nucleus))
    if alpha:
        d = d + alpha * r1 * (best - nucleus) - alpha * r2 * (worst - nucleus)
    return nucleus + ac * d


# ---------------------------------------------------------------- operators

def _electrons(nuclei, config: EngineConfig, rng, r: float) -> np.ndarray:
    n_atoms, dim = nuclei.shape
    E = config.electrons_per_atom
    levels = rng.choice(np.asarray(config.orbits, dtype=float), size=(n_atoms, E, 1))
    u = rng.random((n_atoms, E, dim))
    e = orbit_position(nuclei[:, None, :], u, levels, r)
    return np.clip(e, 1.0, 2.0)


def orbital_transition(atom: Atom, config: EngineConfig, rng, iteration: int = 0) -> np.ndarray:
    """Electrons around one atom, shape ``(electrons_per_atom, D)``."""
    return _electrons(np.atleast_2d(atom.nucleus), config, rng, orbit_radius(config, iteration))[0]


def _relocate(nuclei, best, worst, best_electrons, re, ac, config: EngineConfig, rng):
    r1 = rng.random(nuclei.shape)
    r2 = rng.random(nuclei.shape)
    new = relocation_step(nuclei, best, worst, best_electrons,
                          np.asarray(re)[..., None], np.asarray(ac)[..., None],
                          config.alpha, r1, r2)
    return np.clip(new, 1.0, 2.0)


def nucleus_relocation(atom: Atom, global_best_nucleus, global_worst_nucleus,
                       config: EngineConfig, rng) -> np.ndarray:
    if atom.best_electron is None:
        raise ValueError("atom has no best electron; run orbital_transition first")
    return _relocate(np.atleast_2d(atom.nucleus), global_best_nucleus, global_worst_nucleus,
                     np.atleast_2d(atom.best_electron), np.array([atom.re]),
                     np.array([atom.ac]), config, rng)[0]


def mutate(candidate, config: EngineConfig, rng) -> np.ndarray:
    x = np.array(candidate, dtype=float, copy=True)
    mask = rng.random(x.shape) < config.p_mut
    noise = rng.normal(0.0, 1.0, x.shape) * config.sigma_mut
    return np.clip(np.where(mask, x + noise, x), 1.0, 2.0)


def tune_coefficients(fitness, re, ac, best_idx: int, re_max: float = 2.0,
                      ac_max: float = 2.0, eps: float = 1e-12):
    """Orbital tuner.

    Every atom moves halfway towards the midpoint of the best atom's
    coefficient and the population's fitness-weighted mean, with weights
    ``1 / (f - f_shift)``. Returns the new ``(re, ac)`` arrays.
    """
    f = np.asarray(fitness, dtype=float)
    re, ac = np.asarray(re, dtype=float), np.asarray(ac, dtype=float)
    f_min = f.min()
    shift = f_min - 1.0 if f_min <= 0 else 0.0
    w = 1.0 / np.maximum(f - shift, eps)
    w = w / w.sum()
    centre_re = np.dot(w, re)
    centre_ac = np.dot(w, ac)
    new_re = (re + (re[best_idx] + centre_re) / 2.0) / 2.0
    new_ac = (ac + (ac[best_idx] + centre_ac) / 2.0) / 2.0
    tiny = np.finfo(float).tiny
    return np.clip(new_re, tiny, re_max), np.clip(new_ac, tiny, ac_max)


# -------------------------------------------------------------------- state

@dataclass
class EsoaState:
    nuclei: np.ndarray  # (n, D) in [1, 2]
    fitness: np.ndarray
    re: np.ndarray
    ac: np.ndarray
    best_electrons: np.ndarray
    iteration: int
    rng: np.random.Generator
    tracker: Tracker

    @property
    def atoms(self) -> list[Atom]:
        return [Atom(self.nuclei[k].copy(), float(self.fitness[k]), float(self.re[k]),
                     float(self.ac[k]), self.best_electrons[k].copy())
                for k in range(len(self.fitness))]


class _Evaluator:
    # normalized points -> prepared problem points -> scores
    def __init__(self, objective, space: NormalizedSpace):
        self.objective = objective
        self.space = space

    def __call__(self, U: np.ndarray, iteration: int):
        X = self.objective.prepare(self.space.to_problem(U))
        scores = self.objective.score(X, iteration)
        return np.clip(self.space.to_unit(X), 1.0, 2.0), X, scores


def spread_atoms(config: EngineConfig, space: NormalizedSpace, rng, objective=None) -> list[Atom]:
    """Random initial atoms; evaluated when an objective is supplied."""
    U = 1.0 + rng.random((config.n_atoms, space.dim))
    re = 1.0 - rng.random(config.n_atoms)  # (0, 1]
    ac = 1.0 - rng.random(config.n_atoms)
    fit = np.full(config.n_atoms, np.nan)
    if objective is not None:
        U, _, scores = _Evaluator(objective, space)(U, 0)
        fit = scores.fitness
    return [Atom(U[k], float(fit[k]), float(re[k]), float(ac[k])) for k in range(config.n_atoms)]


def init_state(objective, config: EngineConfig) -> EsoaState:
    space = NormalizedSpace(objective.lb, objective.ub)
    rng = np.random.default_rng(config.seed)
    atoms = spread_atoms(config, space, rng)
    U = np.array([a.nucleus for a in atoms])
    U, X, scores = _Evaluator(objective, space)(U, 0)
    tracker = Tracker(objective)
    tracker.offer(X, scores)
    tracker.record(0)
    return EsoaState(
        nuclei=U,
        fitness=scores.fitness,
        re=np.array([a.re for a in atoms]),
        ac=np.array([a.ac for a in atoms]),
        best_electrons=U.copy(),
        iteration=0,
        rng=rng,
        tracker=tracker,
    )


def step(state: EsoaState, objective, config: EngineConfig) -> EsoaState:
    """Advance one iteration in place and return the state."""
    it = state.iteration + 1
    rng = state.rng
    space = NormalizedSpace(objective.lb, objective.ub)
    evaluate_u = _Evaluator(objective, space)
    n, D = state.nuclei.shape

    # penalty weights escalate with the iteration, so rescore incumbents first
    _, X_nuc, nuc_scores = evaluate_u(state.nuclei, it)
    fitness = nuc_scores.fitness

    electrons = _electrons(state.nuclei, config, rng, orbit_radius(config, it))
    E = electrons.shape[1]
    U_e, X_e, e_scores = evaluate_u(electrons.reshape(n * E, D), it)
    state.tracker.offer(X_e, e_scores)
    e_fit = e_scores.fitness.reshape(n, E)
    pick = np.argmin(e_fit, axis=1)
    best_electrons = U_e.reshape(n, E, D)[np.arange(n), pick]
    best_e_fit = e_fit[np.arange(n), pick]

    best_k = int(np.argmin(fitness))
    worst_k = int(np.argmax(fitness))
    guide = best_electrons
    if config.shared_electron:
        guide = np.broadcast_to(best_electrons[np.argmin(best_e_fit)], best_electrons.shape)
    moved = _relocate(state.nuclei, state.nuclei[best_k], state.nuclei[worst_k],
                      guide, state.re, state.ac, config, rng)
    moved = mutate(moved, config, rng)
    U_new, X_new, new_scores = evaluate_u(moved, it)
    state.tracker.offer(X_new, new_scores)

    cand_u, cand_f = U_new, new_scores.fitness
    if config.adopt_electron:
        take = best_e_fit < cand_f
        cand_u = np.where(take[:, None], best_electrons, cand_u)
        cand_f = np.where(take, best_e_fit, cand_f)
    accept = cand_f < fitness
    state.nuclei = np.where(accept[:, None], cand_u, state.nuclei)
    state.fitness = np.where(accept, cand_f, fitness)
    state.best_electrons = best_electrons

    best_k = int(np.argmin(state.fitness))
    state.re, state.ac = tune_coefficients(state.fitness, state.re, state.ac, best_k,
                                           config.re_max, config.ac_max)
    state.iteration = it
    state.tracker.record(it)
    return state


def minimize(objective, config: EngineConfig, callback=None) -> tuple[np.ndarray, RunTrace]:
    """Run ESOA on any objective; returns the best prepared point and its trace."""
    state = init_state(objective, config)
    for _ in range(config.max_iters):
        step(state, objective, config)
        if callback is not None:
            callback(state)
    return state.tracker.best_point(), state.tracker.trace


def solve(instance: ProblemInstance, config: EngineConfig = EngineConfig(),
          tolerances: Tolerances = Tolerances()) -> SolveResult:
    errs = validate_instance(instance)
    if errs:
        raise ValueError(f"invalid instance {instance.name!r}: " + "; ".join(errs))
    objective = DispatchObjective(instance, config.penalty, tolerances)
    x, trace = minimize(objective, config)
    dv = DecisionVector.from_flat(instance, x)
    return SolveResult(dv, evaluate(instance, dv, tolerances), trace)


def vanilla(config: EngineConfig) -> EngineConfig:
    """Same configuration with the extra movement terms and mutation switched off."""
    return replace(config, alpha=0.0, p_mut=0.0)
