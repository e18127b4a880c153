import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from maed.io import bundled
from maed.model import (Area, FuelOption, Generator, LossModel, ProblemInstance, ProhibitedZone,
                        TieLine, make_single_fuel)

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def case_a():
    return bundled("case_a_6gen_2area")


@pytest.fixture(scope="session")
def case_b():
    return bundled("case_b_40gen_4area")


@pytest.fixture
def two_area():
    """Small lossy instance with a zone, two fuels and one tie line."""
    g1 = Generator("G1", 0, 10.0, 100.0,
                   (FuelOption(10.0, 60.0, 0.01, 2.0, 10.0, 5.0, 0.1),
                    FuelOption(60.0, 100.0, 0.02, 1.5, 20.0)),
                   (ProhibitedZone(40.0, 50.0),))
    g2 = make_single_fuel("G2", 0, 5.0, 80.0, 0.015, 1.8, 5.0)
    g3 = make_single_fuel("G3", 1, 20.0, 120.0, 0.012, 2.2, 8.0, 4.0, 0.05,
                          poz=((60.0, 70.0), (90.0, 95.0)))
    loss0 = LossModel(((1e-4, 2e-5), (2e-5, 1.5e-4)), (1e-3, -5e-4), 0.1)
    return ProblemInstance(
        name="two_area",
        areas=(Area("A1", 120.0, loss0), Area("A2", 60.0)),
        generators=(g1, g2, g3),
        tie_lines=(TieLine(0, 1, 30.0),),
    )


def random_instance(rng: np.random.Generator, max_dim: int = 20) -> ProblemInstance:
    """Random valid instance with ``n_gen + n_ties <= max_dim``."""
    n_areas = int(rng.integers(1, 4))
    pairs = [(i, j) for i in range(n_areas) for j in range(i + 1, n_areas)]
    ties = [TieLine(i, j, float(rng.uniform(5, 50))) for i, j in pairs if rng.random() < 0.7]
    n_gen = int(rng.integers(n_areas, max(n_areas, max_dim - len(ties)) + 1))
    areas_of = np.concatenate([np.arange(n_areas), rng.integers(0, n_areas, n_gen - n_areas)])
    gens = []
    for j, area in enumerate(sorted(areas_of.tolist())):
        p_min = float(rng.uniform(0, 50))
        p_max = p_min + float(rng.uniform(20, 200))
        n_seg = int(rng.integers(1, 4))
        cuts = np.sort(rng.uniform(p_min, p_max, n_seg - 1))
        edges = [p_min, *cuts.tolist(), p_max]
        fuels = tuple(FuelOption(edges[s], edges[s + 1], float(rng.uniform(0, 0.02)),
                                 float(rng.uniform(1, 10)), float(rng.uniform(0, 100)),
                                 float(rng.uniform(0, 200)) * (rng.random() < 0.5),
                                 float(rng.uniform(0.01, 0.1)))
                      for s in range(n_seg))
        zones = []
        if rng.random() < 0.5:
            lo = float(rng.uniform(p_min, p_max - 10))
            zones.append(ProhibitedZone(lo, lo + float(rng.uniform(1, min(10, p_max - lo)))))
        gens.append(Generator(f"G{j}", area, p_min, p_max, fuels, tuple(zones)))
    areas = []
    for a in range(n_areas):
        n = sum(1 for g in gens if g.area == a)
        loss = None
        if rng.random() < 0.7:
            M = rng.uniform(-1e-4, 1e-4, (n, n))
            B = (M + M.T) / 2 + np.diag(rng.uniform(1e-5, 2e-4, n))
            loss = LossModel(tuple(map(tuple, B)), tuple(rng.uniform(-1e-3, 1e-3, n)),
                             float(rng.uniform(0, 1)))
        areas.append(Area(f"A{a}", float(rng.uniform(50, 500)), loss))
    return ProblemInstance("random", tuple(areas), tuple(gens), tuple(ties))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
