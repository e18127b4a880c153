"""Multi-area economic dispatch data model and evaluation.

Generator outputs and tie-line flows form the decision vector. Costs are
quadratic with a rectified-sine valve-point ripple, optionally piecewise over
several fuel segments. Each area balances its own generation against demand,
B-coefficient losses and net tie-line export.

Everything numeric goes through :func:`evaluate_batch`, which works on a whole
population at once; :func:`evaluate` is the single-vector view of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "FuelOption",
    "ProhibitedZone",
    "Generator",
    "LossModel",
    "Area",
    "TieLine",
    "ProblemInstance",
    "DecisionVector",
    "Tolerances",
    "EvaluationReport",
    "BatchEvaluation",
    "DomainError",
    "InputError",
    "generator_cost",
    "total_cost",
    "area_losses",
    "area_balance_residual",
    "poz_violation",
    "evaluate",
    "evaluate_batch",
    "validate_instance",
    "make_single_fuel",
]


class DomainError(ValueError):
    """Raised when a generator output lies outside its operating range."""


class InputError(ValueError):
    """Raised on malformed decision vectors (wrong size, NaN, Inf)."""


@dataclass(frozen=True)
class FuelOption:
    """One fuel segment: ``a p^2 + b p + c + |e sin(f (p_low - p))|`` on [p_low, p_high]."""

    p_low: float
    p_high: float
    a: float
    b: float
    c: float
    e: float = 0.0
    f: float = 0.0

    def cost(self, p: float) -> float:
        return (self.a * p * p + self.b * p + self.c
                + abs(self.e * math.sin(self.f * (self.p_low - p))))


@dataclass(frozen=True)
class ProhibitedZone:
    low: float
    up: float


@dataclass(frozen=True)
class Generator:
    id: str
    area: int
    p_min: float
    p_max: float
    fuel_options: tuple[FuelOption, ...]
    poz: tuple[ProhibitedZone, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "fuel_options", tuple(self.fuel_options))
        object.__setattr__(self, "poz", tuple(self.poz))

    def fuel_for(self, p: float) -> FuelOption:
        """Fuel segment owning ``p``; a shared breakpoint goes to the lower segment."""
        for opt in self.fuel_options:
            if p <= opt.p_high:
                return opt
        return self.fuel_options[-1]


@dataclass(frozen=True)
class LossModel:
    """B-coefficient loss model ``p'Bp + B0'p + B00`` for one area.

    ``B`` is stored as nested tuples so instances stay hashable and immutable;
    use :attr:`matrix` / :attr:`linear` for array views.
    """

    B: tuple[tuple[float, ...], ...]
    B0: tuple[float, ...]
    B00: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "B", tuple(tuple(float(v) for v in row) for row in self.B))
        object.__setattr__(self, "B0", tuple(float(v) for v in self.B0))
        object.__setattr__(self, "B00", float(self.B00))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.B, dtype=float).reshape(len(self.B0), len(self.B0))

    @property
    def linear(self) -> np.ndarray:
        return np.array(self.B0, dtype=float)


@dataclass(frozen=True)
class Area:
    id: str
    demand: float
    loss: Optional[LossModel] = None


@dataclass(frozen=True)
class TieLine:
    """Corridor between two areas. Positive flow runs ``from_area -> to_area``."""

    from_area: int
    to_area: int
    capacity: float


@dataclass(frozen=True)
class _Tables:
    # padded array form of an instance, shared by every evaluation
    p_min: np.ndarray
    p_max: np.ndarray
    seg_high: np.ndarray  # (G, S), +inf padding
    seg_low: np.ndarray
    seg_a: np.ndarray
    seg_b: np.ndarray
    seg_c: np.ndarray
    seg_e: np.ndarray
    seg_f: np.ndarray
    n_seg: np.ndarray
    poz_low: np.ndarray  # (G, Z), nan padding
    poz_up: np.ndarray
    area_of: np.ndarray
    membership: np.ndarray  # (M, G)
    incidence: np.ndarray  # (M, K), +1 exporter side, -1 importer side
    loss_B: np.ndarray  # (G, G) block diagonal by area
    loss_B0: np.ndarray  # (G,)
    loss_B00: np.ndarray  # (M,)
    demand: np.ndarray
    tie_cap: np.ndarray


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    areas: tuple[Area, ...]
    generators: tuple[Generator, ...]
    tie_lines: tuple[TieLine, ...] = ()
    provenance: str = ""

    def __post_init__(self):
        for attr in ("areas", "generators", "tie_lines"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))

    @property
    def n_gen(self) -> int:
        return len(self.generators)

    @property
    def n_ties(self) -> int:
        return len(self.tie_lines)

    @property
    def dim(self) -> int:
        return self.n_gen + self.n_ties

    def area_generators(self, area_idx: int) -> list[int]:
        return [j for j, g in enumerate(self.generators) if g.area == area_idx]

    def lower_bounds(self) -> np.ndarray:
        return np.concatenate([self.tables.p_min, -self.tables.tie_cap])

    def upper_bounds(self) -> np.ndarray:
        return np.concatenate([self.tables.p_max, self.tables.tie_cap])

    @cached_property
    def tables(self) -> _Tables:
        gens = self.generators
        G, M, K = len(gens), len(self.areas), len(self.tie_lines)
        S = max((len(g.fuel_options) for g in gens), default=1)
        Z = max((len(g.poz) for g in gens), default=0)

        seg = {k: np.zeros((G, S)) for k in ("low", "a", "b", "c", "e", "f")}
        seg_high = np.full((G, S), np.inf)
        poz_low = np.full((G, Z), np.nan)
        poz_up = np.full((G, Z), np.nan)
        for j, g in enumerate(gens):
            for s, opt in enumerate(g.fuel_options):
                seg_high[j, s] = opt.p_high
                for k in seg:
                    seg[k][j, s] = getattr(opt, "p_low" if k == "low" else k)
            for z, zone in enumerate(g.poz):
                poz_low[j, z], poz_up[j, z] = zone.low, zone.up

        area_of = np.array([g.area for g in gens], dtype=int)
        membership = np.zeros((M, G))
        membership[area_of, np.arange(G)] = 1.0
        incidence = np.zeros((M, K))
        for k, tl in enumerate(self.tie_lines):
            incidence[tl.from_area, k] += 1.0
            incidence[tl.to_area, k] -= 1.0

        loss_B = np.zeros((G, G))
        loss_B0 = np.zeros(G)
        loss_B00 = np.zeros(M)
        for i, area in enumerate(self.areas):
            if area.loss is None:
                continue
            idx = np.array(self.area_generators(i), dtype=int)
            loss_B[np.ix_(idx, idx)] = area.loss.matrix
            loss_B0[idx] = area.loss.linear
            loss_B00[i] = area.loss.B00

        tables = _Tables(
            p_min=np.array([g.p_min for g in gens], dtype=float),
            p_max=np.array([g.p_max for g in gens], dtype=float),
            seg_high=seg_high, seg_low=seg["low"], seg_a=seg["a"], seg_b=seg["b"],
            seg_c=seg["c"], seg_e=seg["e"], seg_f=seg["f"],
            n_seg=np.array([len(g.fuel_options) for g in gens], dtype=int),
            poz_low=poz_low, poz_up=poz_up,
            area_of=area_of, membership=membership, incidence=incidence,
            loss_B=loss_B, loss_B0=loss_B0, loss_B00=loss_B00,
            demand=np.array([a.demand for a in self.areas], dtype=float),
            tie_cap=np.array([t.capacity for t in self.tie_lines], dtype=float),
        )
        for arr in vars(tables).values():
            arr.setflags(write=False)
        return tables


@dataclass(frozen=True)
class DecisionVector:
    """Generator outputs ``p`` (instance order) and tie flows ``t`` (tie order)."""

    p: np.ndarray
    t: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).ravel())
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float).ravel())

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.p, self.t])

    @classmethod
    def from_flat(cls, instance: ProblemInstance, x) -> "DecisionVector":
        x = np.asarray(x, dtype=float).ravel()
        if x.size != instance.dim:
            raise InputError(f"expected {instance.dim} entries, got {x.size}")
        return cls(x[: instance.n_gen].copy(), x[instance.n_gen:].copy())

    def __eq__(self, other):
        if not isinstance(other, DecisionVector):
            return NotImplemented
        return np.array_equal(self.p, other.p) and np.array_equal(self.t, other.t)

    __hash__ = None


@dataclass(frozen=True)
class Tolerances:
    balance: float = 1e-3
    bound: float = 1e-6
    poz: float = 1e-6
    tie: float = 1e-6


@dataclass(frozen=True)
class EvaluationReport:
    cost: float
    area_losses: np.ndarray
    balance_residual: np.ndarray
    bound_violation: float
    poz_violation: float
    tie_violation: float
    feasible: bool
    # per-entry magnitudes behind the totals above
    bound_excess: np.ndarray
    poz_excess: np.ndarray
    tie_excess: np.ndarray

    def to_dict(self) -> dict:
        return {
            "cost": self.cost,
            "area_losses": self.area_losses.tolist(),
            "balance_residual": self.balance_residual.tolist(),
            "bound_violation": self.bound_violation,
            "poz_violation": self.poz_violation,
            "tie_violation": self.tie_violation,
            "feasible": self.feasible,
        }


@dataclass(frozen=True)
class BatchEvaluation:
    """Row-wise evaluation of ``n`` candidate vectors."""

    cost: np.ndarray  # (n,)
    area_losses: np.ndarray  # (n, M)
    balance_residual: np.ndarray  # (n, M)
    bound_excess: np.ndarray  # (n, G)
    poz_excess: np.ndarray  # (n, G)
    tie_excess: np.ndarray  # (n, K)

    def feasible(self, tol: Tolerances = Tolerances()) -> np.ndarray:
        ok = np.abs(self.balance_residual).max(axis=1, initial=0.0) <= tol.balance
        ok &= self.bound_excess.sum(axis=1) <= tol.bound
        ok &= self.poz_excess.sum(axis=1) <= tol.poz
        ok &= self.tie_excess.sum(axis=1) <= tol.tie
        return ok

    def report(self, row: int = 0, tol: Tolerances = Tolerances()) -> EvaluationReport:
        return EvaluationReport(
            cost=float(self.cost[row]),
            area_losses=self.area_losses[row].copy(),
            balance_residual=self.balance_residual[row].copy(),
            bound_violation=float(self.bound_excess[row].sum()),
            poz_violation=float(self.poz_excess[row].sum()),
            tie_violation=float(self.tie_excess[row].sum()),
            feasible=bool(self.feasible(tol)[row]),
            bound_excess=self.bound_excess[row].copy(),
            poz_excess=self.poz_excess[row].copy(),
            tie_excess=self.tie_excess[row].copy(),
        )


# ---------------------------------------------------------------- scalar API

def generator_cost(gen: Generator, p: float) -> float:
    """Fuel cost of ``gen`` at output ``p`` (MW).

    The valve-point ripple of each fuel segment is anchored at that segment's
    ``p_low``; for single-fuel units this is ``p_min``.
    """
    if not (gen.p_min <= p <= gen.p_max) or math.isnan(p):
        raise DomainError(f"generator {gen.id}: output {p} outside [{gen.p_min}, {gen.p_max}]")
    return gen.fuel_for(p).cost(p)


def poz_violation(gen: Generator, p: float) -> float:
    """Distance from ``p`` to the nearest edge of the zone containing it (0 outside)."""
    for zone in gen.poz:
        if zone.low < p < zone.up:
            return min(p - zone.low, zone.up - p)
    return 0.0


def _check_dv(instance: ProblemInstance, dv: DecisionVector):
    if dv.p.size != instance.n_gen or dv.t.size != instance.n_ties:
        raise InputError(
            f"decision vector has {dv.p.size}+{dv.t.size} entries, "
            f"instance {instance.name!r} needs {instance.n_gen}+{instance.n_ties}")
    if not (np.all(np.isfinite(dv.p)) and np.all(np.isfinite(dv.t))):
        raise InputError("decision vector contains NaN or Inf")


def total_cost(instance: ProblemInstance, dv: DecisionVector) -> float:
    _check_dv(instance, dv)
    return float(_batch_cost(instance.tables, dv.p[None, :])[0])


def area_losses(instance: ProblemInstance, area_idx: int, dv: DecisionVector) -> float:
    _check_dv(instance, dv)
    return float(_batch_losses(instance.tables, dv.p[None, :])[0, area_idx])


def area_balance_residual(instance: ProblemInstance, area_idx: int, dv: DecisionVector) -> float:
    """Generation minus demand, losses and net export for one area (0 = balanced)."""
    _check_dv(instance, dv)
    tb = instance.tables
    res = _batch_residual(tb, dv.p[None, :], dv.t[None, :], _batch_losses(tb, dv.p[None, :]))
    return float(res[0, area_idx])


def evaluate(instance: ProblemInstance, dv: DecisionVector,
             tolerances: Tolerances = Tolerances()) -> EvaluationReport:
    _check_dv(instance, dv)
    return evaluate_batch(instance, dv.p[None, :], dv.t[None, :]).report(0, tolerances)


# ----------------------------------------------------------------- batch API

def _batch_cost(tb: _Tables, P: np.ndarray) -> np.ndarray:
    # segment index = number of segment upper edges strictly below p
    idx = (P[:, :, None] > tb.seg_high[None, :, :]).sum(axis=2)
    idx = np.minimum(idx, tb.n_seg[None, :] - 1)[:, :, None]

    def pick(arr):
        return np.take_along_axis(np.broadcast_to(arr, P.shape + arr.shape[1:]), idx, axis=2)[:, :, 0]

    a, b, c = pick(tb.seg_a), pick(tb.seg_b), pick(tb.seg_c)
    e, f, lo = pick(tb.seg_e), pick(tb.seg_f), pick(tb.seg_low)
    per_gen = a * P * P + b * P + c + np.abs(e * np.sin(f * (lo - P)))
    return per_gen.sum(axis=1)


def _batch_losses(tb: _Tables, P: np.ndarray) -> np.ndarray:
    quad = P * (P @ tb.loss_B)  # B is block diagonal, so row sums stay per area
    per_gen = quad + tb.loss_B0 * P
    return per_gen @ tb.membership.T + tb.loss_B00


def _batch_residual(tb: _Tables, P, T, losses) -> np.ndarray:
    return P @ tb.membership.T - tb.demand - losses - T @ tb.incidence.T


def _batch_poz(tb: _Tables, P: np.ndarray) -> np.ndarray:
    if tb.poz_low.shape[1] == 0:
        return np.zeros_like(P)
    Pz = P[:, :, None]
    with np.errstate(invalid="ignore"):
        inside = (Pz > tb.poz_low) & (Pz < tb.poz_up)
        depth = np.minimum(Pz - tb.poz_low, tb.poz_up - Pz)
    return np.where(inside, depth, 0.0).max(axis=2)


def evaluate_batch(instance: ProblemInstance, P, T=None) -> BatchEvaluation:
    """Evaluate many candidates at once.

    Parameters
    ----------
    instance : ProblemInstance
    P : array_like, shape (n, N_g)
        Generator outputs. Out-of-range entries are recorded as bound excess and
        the cost/loss terms use the clamped value.
    T : array_like, shape (n, K), optional
        Tie-line flows; zeros when omitted.
    """
    tb = instance.tables
    P = np.atleast_2d(np.asarray(P, dtype=float))
    T = np.zeros((P.shape[0], instance.n_ties)) if T is None else np.atleast_2d(np.asarray(T, dtype=float))
    if P.shape[1] != instance.n_gen or T.shape[1] != instance.n_ties or T.shape[0] != P.shape[0]:
        raise InputError(f"batch shapes {P.shape}/{T.shape} do not match instance {instance.name!r}")
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(T))):
        raise InputError("decision vector contains NaN or Inf")

    Pc = np.clip(P, tb.p_min, tb.p_max)
    bound_excess = np.abs(P - Pc)
    tie_excess = np.maximum(np.abs(T) - tb.tie_cap, 0.0)
    losses = _batch_losses(tb, Pc)
    return BatchEvaluation(
        cost=_batch_cost(tb, Pc),
        area_losses=losses,
        balance_residual=_batch_residual(tb, Pc, T, losses),
        bound_excess=bound_excess,
        poz_excess=_batch_poz(tb, Pc),
        tie_excess=tie_excess,
    )


# ---------------------------------------------------------------- validation

def validate_instance(instance: ProblemInstance) -> list[str]:
    """Return every invariant violation found in ``instance`` (empty list = ok)."""
    errs: list[str] = []
    M = len(instance.areas)
    if M == 0:
        errs.append("instance has no areas")
    for i, area in enumerate(instance.areas):
        if not area.demand >= 0:
            errs.append(f"area {area.id}: negative demand {area.demand}")
        if not any(g.area == i for g in instance.generators):
            errs.append(f"area {area.id}: no generators")

    for g in instance.generators:
        if not 0 <= g.area < M:
            errs.append(f"generator {g.id}: area index {g.area} out of range")
        if not g.p_min < g.p_max:
            errs.append(f"generator {g.id}: p_min {g.p_min} >= p_max {g.p_max}")
        errs.extend(_fuel_errors(g))
        errs.extend(_poz_errors(g))

    for i, area in enumerate(instance.areas):
        if area.loss is None:
            continue
        n = sum(1 for g in instance.generators if g.area == i)
        B = np.array(area.loss.B, dtype=float)
        if B.shape != (n, n) or len(area.loss.B0) != n:
            errs.append(f"area {area.id}: loss model sized {B.shape}/{len(area.loss.B0)}, "
                        f"area has {n} generators")
            continue
        scale = max(np.abs(B).max(), np.finfo(float).tiny)
        if np.abs(B - B.T).max() > 1e-12 * scale:
            errs.append(f"area {area.id}: loss matrix B is not symmetric")

    seen = set()
    for k, tl in enumerate(instance.tie_lines):
        label = f"tie line {k} ({tl.from_area}-{tl.to_area})"
        if not (0 <= tl.from_area < M and 0 <= tl.to_area < M):
            errs.append(f"{label}: unknown area")
        if not tl.from_area < tl.to_area:
            errs.append(f"{label}: from_area must be lower than to_area")
        if not tl.capacity > 0:
            errs.append(f"{label}: capacity must be positive")
        pair = frozenset((tl.from_area, tl.to_area))
        if pair in seen:
            errs.append(f"{label}: duplicate tie line for this area pair")
        seen.add(pair)
    return errs


def _fuel_errors(g: Generator) -> list[str]:
    opts = g.fuel_options
    if not opts:
        return [f"generator {g.id}: no fuel options"]
    errs = []
    for s, o in enumerate(opts):
        if not o.p_low < o.p_high:
            errs.append(f"generator {g.id}: fuel {s} has p_low >= p_high")
        if o.a < 0 or o.e < 0 or o.f < 0:
            errs.append(f"generator {g.id}: fuel {s} has negative a, e or f")
    if opts[0].p_low != g.p_min or opts[-1].p_high != g.p_max:
        errs.append(f"generator {g.id}: fuel segments do not span [{g.p_min}, {g.p_max}]")
    for s in range(1, len(opts)):
        if opts[s].p_low != opts[s - 1].p_high:
            errs.append(f"generator {g.id}: fuel segments {s - 1} and {s} are not contiguous")
    return errs


def _poz_errors(g: Generator) -> list[str]:
    errs = []
    for z, zone in enumerate(g.poz):
        if not zone.low < zone.up:
            errs.append(f"generator {g.id}: zone {z} [{zone.low}, {zone.up}] is empty")
        if not (g.p_min < zone.low and zone.up < g.p_max):
            errs.append(f"generator {g.id}: zone {z} [{zone.low}, {zone.up}] "
                        f"not strictly inside [{g.p_min}, {g.p_max}]")
    for z in range(1, len(g.poz)):
        prev, cur = g.poz[z - 1], g.poz[z]
        if cur.low < prev.up:
            errs.append(f"generator {g.id}: zones {z - 1} [{prev.low}, {prev.up}] and "
                        f"{z} [{cur.low}, {cur.up}] overlap or are unsorted")
    return errs


def make_single_fuel(id: str, area: int, p_min: float, p_max: float, a: float, b: float,
                     c: float, e: float = 0.0, f: float = 0.0,
                     poz: Sequence[tuple[float, float]] = ()) -> Generator:
    """Shorthand for the common one-segment generator."""
    return Generator(id, area, p_min, p_max, (FuelOption(p_min, p_max, a, b, c, e, f),),
                     tuple(ProhibitedZone(lo, up) for lo, up in poz))
