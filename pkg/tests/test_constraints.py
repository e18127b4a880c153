import numpy as np
import pytest
from hypothesis import given, strategies as st

import conftest
import oracles
from maed.constraints import (DispatchObjective, PenaltyWeights, balance_batch, clamp_batch,
                              clamp_bounds, penalized_fitness, repair_batch, repair_poz)
from maed.model import DecisionVector, EvaluationReport, Tolerances, evaluate, make_single_fuel

ZONED = make_single_fuel("G", 0, 50, 200, 0, 1, 0, poz=((100.0, 150.0),))


@pytest.mark.parametrize("p, expected", [(120.0, 100.0), (130.0, 150.0), (125.0, 100.0),
                                         (100.0, 100.0), (90.0, 90.0), (150.0, 150.0)])
def test_repair_poz_examples(p, expected):
    assert repair_poz(ZONED, p) == expected


def test_clamp_examples(two_area):
    g = two_area.generators[0]
    dv = clamp_bounds(two_area, DecisionVector([g.p_max + 50, 40.0, 80.0], [-31.0]))
    assert dv.p[0] == g.p_max
    assert dv.t[0] == -30.0
    ok = DecisionVector([55.5, 40.25, 80.0], [12.0])
    again = clamp_bounds(two_area, ok)
    assert again.p.tobytes() == ok.p.tobytes() and again.t.tobytes() == ok.t.tobytes()


def test_repair_batch_matches_scalar(case_a):
    rng = np.random.default_rng(5)
    X = clamp_batch(case_a, rng.uniform(case_a.lower_bounds(), case_a.upper_bounds(), (500, case_a.dim)))
    R = repair_batch(case_a, X)
    for row, x in zip(R, X):
        expect = [repair_poz(g, v) for g, v in zip(case_a.generators, x[:case_a.n_gen])]
        assert row[:case_a.n_gen].tolist() == expect
        assert row[case_a.n_gen:].tolist() == x[case_a.n_gen:].tolist()


def test_repair_moves_at_most_half_widest_zone(case_a):
    rng = np.random.default_rng(6)
    X = clamp_batch(case_a, rng.uniform(case_a.lower_bounds(), case_a.upper_bounds(), (2000, case_a.dim)))
    R = repair_batch(case_a, X)
    widest = np.array([max((z.up - z.low for z in g.poz), default=0.0) for g in case_a.generators])
    assert np.all(np.abs(R - X)[:, :case_a.n_gen] <= widest / 2 + 1e-12)


def test_bundled_generators_repair_on_grid(case_a):
    for g in case_a.generators:
        grid = np.minimum(g.p_min + 0.01 * np.arange(int(round((g.p_max - g.p_min) / 0.01)) + 1), g.p_max)
        for p in grid:
            r = repair_poz(g, float(p))
            assert g.p_min <= r <= g.p_max
            assert not oracles.in_zone(g, r)


def test_penalty_examples():
    feasible = EvaluationReport(cost=100.0, area_losses=np.zeros(1), balance_residual=np.zeros(1),
                                bound_violation=0.0, poz_violation=0.0, tie_violation=0.0,
                                feasible=True, bound_excess=np.zeros(2), poz_excess=np.zeros(2),
                                tie_excess=np.zeros(0))
    w = PenaltyWeights(w_balance=1000.0, escalation=1.0)
    assert penalized_fitness(feasible, w, 7) == 100.0
    off = EvaluationReport(cost=100.0, area_losses=np.zeros(1), balance_residual=np.array([2.0]),
                           bound_violation=0.0, poz_violation=0.0, tie_violation=0.0, feasible=False,
                           bound_excess=np.zeros(2), poz_excess=np.zeros(2), tie_excess=np.zeros(0))
    assert penalized_fitness(off, w, 3) == pytest.approx(4100.0)


def test_penalty_escalation_is_capped():
    w = PenaltyWeights(escalation=1.5)
    assert w.balance_weight(10_000) == pytest.approx(w.w_balance * 1e6)
    assert w.balance_weight(0) == w.w_balance


def test_penalty_monotone_in_each_violation():
    rng = np.random.default_rng(8)
    w = PenaltyWeights()

    def rep(res, bound, poz, tie):
        return EvaluationReport(cost=50.0, area_losses=np.zeros(2), balance_residual=res,
                                bound_violation=0, poz_violation=0, tie_violation=0, feasible=False,
                                bound_excess=bound, poz_excess=poz, tie_excess=tie)

    for _ in range(1000):
        parts = [rng.normal(0, 3, 2), rng.uniform(0, 3, 3), rng.uniform(0, 3, 3), rng.uniform(0, 3, 1)]
        base = penalized_fitness(rep(*parts), w, 4)
        assert base >= 50.0
        k = rng.integers(0, 4)
        bigger = [x.copy() for x in parts]
        bigger[k] = bigger[k] * rng.uniform(1, 2)
        assert penalized_fitness(rep(*bigger), w, 4) >= base


def test_weights_validated():
    with pytest.raises(ValueError):
        PenaltyWeights(w_poz=0)
    with pytest.raises(ValueError):
        PenaltyWeights(escalation=0.9)


@given(st.integers(0, 2**32 - 1))
def test_clamp_and_repair_idempotent(seed):
    rng = np.random.default_rng(seed)
    inst = conftest.random_instance(rng)
    lo, hi = inst.lower_bounds(), inst.upper_bounds()
    X = rng.uniform(lo - 50, hi + 50, (20, inst.dim))
    C = clamp_batch(inst, X)
    assert np.array_equal(clamp_batch(inst, C), C)
    R = repair_batch(inst, C)
    assert np.array_equal(repair_batch(inst, R), R)
    assert np.array_equal(repair_batch(inst, clamp_batch(inst, R)), R)


@given(st.integers(0, 2**32 - 1))
def test_balance_repair_keeps_box_and_zones(seed):
    rng = np.random.default_rng(seed)
    inst = conftest.random_instance(rng)
    X = rng.uniform(inst.lower_bounds() - 10, inst.upper_bounds() + 10, (10, inst.dim))
    Y = balance_batch(inst, X)
    assert np.all(Y >= inst.lower_bounds()) and np.all(Y <= inst.upper_bounds())
    for row in Y:
        for g, v in zip(inst.generators, row[:inst.n_gen]):
            assert not oracles.in_zone(g, v)


def test_balance_repair_reaches_balance(case_b):
    rng = np.random.default_rng(0)
    X = rng.uniform(case_b.lower_bounds(), case_b.upper_bounds(), (200, case_b.dim))
    ev = DispatchObjective(case_b).evaluate(balance_batch(case_b, X))
    assert ev.feasible(Tolerances()).mean() > 0.95


def test_feasible_vector_fitness_equals_cost(two_area):
    obj = DispatchObjective(two_area)
    rng = np.random.default_rng(1)
    X = obj.prepare(rng.uniform(obj.lb, obj.ub, (100, obj.dim)))
    s = obj.score(X, 10)
    assert s.feasible.any()
    assert np.array_equal(s.fitness[s.feasible], s.cost[s.feasible])
    for x in X[s.feasible][:5]:
        rep = evaluate(two_area, DecisionVector.from_flat(two_area, x))
        assert penalized_fitness(rep, obj.weights, 10) == rep.cost


def test_objective_without_balance_repair(two_area):
    obj = DispatchObjective(two_area, balance_repair=False)
    X = np.array([[120.0, 40.0, 65.0, 50.0]])
    Y = obj.prepare(X)
    assert Y.tolist() == [[100.0, 40.0, 60.0, 30.0]]
