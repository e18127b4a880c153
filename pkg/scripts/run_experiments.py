"""Multi-seed ESOA vs GA benchmark on the bundled systems.

Writes per-run traces/reports under ``<out>/<case>_<algo>/`` and a
comparison table ``<out>/comparison.csv``.

    python scripts/run_experiments.py --out results --runs 11
"""

import argparse
import csv
import json
from pathlib import Path

from maed.cli import main as maed
from maed.io import BUNDLED


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results")
    ap.add_argument("--runs", type=int, default=11)
    ap.add_argument("--cases", nargs="+", default=list(BUNDLED), choices=BUNDLED)
    ap.add_argument("--algos", nargs="+", default=["esoa", "ga"], choices=["esoa", "ga"])
    ap.add_argument("--seed", type=int, default=0)
    return ap.parse_args()


def run():
    args = parse_args()
    out = Path(args.out)
    rows = []
    for case in args.cases:
        for algo in args.algos:
            where = out / f"{case}_{algo}"
            maed(["bench", "--instance", case, "--algo", algo, "--runs", str(args.runs),
                  "--seed", str(args.seed), "--out", str(where)])
            summary = json.loads((where / "summary.json").read_text())
            timing = json.loads((where / "timing.json").read_text())
            st = summary.get("stats", {})
            rows.append({"case": case, "algo": algo, "runs": st.get("n_runs", 0),
                         "min": st.get("min"), "mean": st.get("mean"), "max": st.get("max"),
                         "std": st.get("std"), "feasible_rate": st.get("feasibility_rate"),
                         "wall_s": round(timing["wall_time_s"], 2)})
            print(f"{case:22s} {algo:4s} min={st.get('min', float('nan')):.3f} "
                  f"mean={st.get('mean', float('nan')):.3f} feasible={st.get('feasibility_rate')}")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "comparison.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    run()
