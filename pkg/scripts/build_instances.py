"""Regenerate the bundled instance files under src/maed/data/.

Coefficients are typed in from the published test systems named in each
file's provenance note.
"""

from pathlib import Path

import numpy as np

from maed.io import save_instance
from maed.model import Area, LossModel, ProblemInstance, TieLine, make_single_fuel

DATA = Path(__file__).resolve().parents[1] / "src" / "maed" / "data"

# p_min p_max a b c, prohibited zones
UNITS_6 = [
    (100, 500, 0.0070, 7.0, 240, [(210, 240), (350, 380)]),
    (50, 200, 0.0095, 10.0, 200, [(90, 110), (140, 160)]),
    (80, 300, 0.0090, 8.5, 220, [(150, 170), (210, 240)]),
    (50, 150, 0.0090, 11.0, 200, [(80, 90), (110, 120)]),
    (50, 200, 0.0080, 10.5, 220, [(90, 110), (140, 150)]),
    (50, 120, 0.0075, 12.0, 190, [(75, 85), (100, 105)]),
]
# per-unit on 100 MVA; divided by 100 below to get 1/MW
B_6 = np.array([
    [0.0017, 0.0012, 0.0007, -0.0001, -0.0005, -0.0002],
    [0.0012, 0.0014, 0.0009, 0.0001, -0.0006, -0.0001],
    [0.0007, 0.0009, 0.0031, 0.0000, -0.0010, -0.0006],
    [-0.0001, 0.0001, 0.0000, 0.0024, -0.0006, -0.0008],
    [-0.0005, -0.0006, -0.0010, -0.0006, 0.0129, -0.0002],
    [-0.0002, -0.0001, -0.0006, -0.0008, -0.0002, 0.0150],
]) * 1e-2
B0_6 = np.array([-0.3908, -0.1297, 0.7047, 0.0591, 0.2161, -0.6635]) * 1e-3
B00_6 = 0.056

# p_min p_max a b c e f
UNITS_40 = """
36 114 0.00690 6.73 94.705 100 0.084
36 114 0.00690 6.73 94.705 100 0.084
60 120 0.02028 7.07 309.54 100 0.084
80 190 0.00942 8.18 369.03 150 0.063
47 97 0.01140 5.35 148.89 120 0.077
68 140 0.01142 8.05 222.33 100 0.084
110 300 0.00357 8.03 287.71 200 0.042
135 300 0.00492 6.99 391.98 200 0.042
135 300 0.00573 6.60 455.76 200 0.042
130 300 0.00605 12.9 722.82 200 0.042
94 375 0.00515 12.9 635.20 200 0.042
94 375 0.00569 12.8 654.69 200 0.042
125 500 0.00421 12.5 913.40 300 0.035
125 500 0.00752 8.84 1760.4 300 0.035
125 500 0.00708 9.15 1728.3 300 0.035
125 500 0.00708 9.15 1728.3 300 0.035
220 500 0.00313 7.97 647.85 300 0.035
220 500 0.00313 7.95 649.69 300 0.035
242 550 0.00313 7.97 647.83 300 0.035
242 550 0.00313 7.97 647.81 300 0.035
254 550 0.00298 6.63 785.96 300 0.035
254 550 0.00298 6.63 785.96 300 0.035
254 550 0.00284 6.66 794.53 300 0.035
254 550 0.00284 6.66 794.53 300 0.035
254 550 0.00277 7.10 801.32 300 0.035
254 550 0.00277 7.10 801.32 300 0.035
10 150 0.52124 3.33 1055.1 120 0.077
10 150 0.52124 3.33 1055.1 120 0.077
10 150 0.52124 3.33 1055.1 120 0.077
47 97 0.01140 5.35 148.89 120 0.077
60 190 0.00160 6.43 222.92 150 0.063
60 190 0.00160 6.43 222.92 150 0.063
60 190 0.00160 6.43 222.92 150 0.063
90 200 0.0001 8.95 107.87 200 0.042
90 200 0.0001 8.62 116.58 200 0.042
90 200 0.0001 8.62 116.58 200 0.042
25 110 0.0161 5.88 307.45 80 0.098
25 110 0.0161 5.88 307.45 80 0.098
25 110 0.0161 5.88 307.45 80 0.098
242 550 0.00313 7.97 647.83 300 0.035
"""


def _r(x):
    # strip binary noise left by the unit conversion
    return float(f"{x:.6g}")


def case_a() -> ProblemInstance:
    areas = []
    for i, (sl, demand) in enumerate([(slice(0, 3), 757.8), (slice(3, 6), 505.2)]):
        B = [[_r(v) for v in row] for row in B_6[sl, sl]]
        areas.append(Area(f"A{i + 1}", demand, LossModel(B, [_r(v) for v in B0_6[sl]], B00_6)))
    gens = [make_single_fuel(f"P{1 + j // 3}{1 + j % 3}", j // 3, *row[:5], poz=row[5])
            for j, row in enumerate(UNITS_6)]
    return ProblemInstance(
        name="case_a_6gen_2area",
        areas=areas, generators=gens, tie_lines=[TieLine(0, 1, 100.0)],
        provenance=(
            "Six thermal units in two areas (units 1-3 in area A1, 4-6 in A2). Unit limits, "
            "quadratic cost coefficients, prohibited zones and the B/B0/B00 loss coefficients are "
            "the widely used 6-unit test system of Z.-L. Gaing, IEEE Trans. Power Syst. 18(3), 2003. "
            "Each area uses the diagonal block of the system B matrix for its own units and the full "
            "B00 = 0.056 MW. The source system has no valve-point data, so e = f = 0. "
            "Demand 1263 MW split 60/40 (757.8 / 505.2 MW); tie line capacity 100 MW. "
            "The multi-area variant used in the TLBO study (M. Basu, Energy 68, 2014) differs in "
            "cost coefficients and unit 4 limits; those values were not available when this file "
            "was assembled, so published costs for that variant are not reproduced by this data."),
    )


def case_b() -> ProblemInstance:
    rows = [[float(v) for v in line.split()] for line in UNITS_40.strip().splitlines()]
    gens = [make_single_fuel(f"P{1 + j // 10}{1 + j % 10}", j // 10, *row)
            for j, row in enumerate(rows)]
    caps = {(0, 1): 200.0, (0, 2): 200.0, (0, 3): 200.0, (1, 2): 200.0, (1, 3): 100.0, (2, 3): 100.0}
    return ProblemInstance(
        name="case_b_40gen_4area",
        areas=[Area(f"A{i + 1}", d) for i, d in enumerate([1575.0, 4200.0, 3150.0, 1575.0])],
        generators=gens,
        tie_lines=[TieLine(i, j, c) for (i, j), c in caps.items()],
        provenance=(
            "Forty valve-point units (N. Sinha, R. Chakrabarti, P.K. Chattopadhyay, IEEE Trans. "
            "Evol. Comput. 7(1), 2003), ten per area in index order, lossless, as arranged for "
            "multi-area dispatch by M. Basu (Energy 68, 2014). Total demand 10500 MW split "
            "15/40/30/15 percent. Tie limits 200 MW except A2-A4 and A3-A4 at 100 MW."),
    )


if __name__ == "__main__":
    for inst in (case_a(), case_b()):
        save_instance(inst, DATA / f"{inst.name}.json")
        print("wrote", inst.name)
