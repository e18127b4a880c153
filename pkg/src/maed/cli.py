"""Command line harness: ``maed solve|evaluate|bench``.

Exit codes: 0 feasible, 2 infeasible result, 64 usage error, 65 data error.

Settings are resolved as built-in defaults, then ``MAED_SEED``, then the
``--config`` file, then flags given explicitly on the command line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, fields, replace
from pathlib import Path

import numpy as np

from . import esoa, ga
from .constraints import PenaltyWeights
from .io import InstanceFileError, load_instance, load_solution, write_atomic
from .model import DecisionVector, InputError, ProblemInstance, Tolerances, evaluate

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_USAGE = 64
EXIT_DATA = 65

DEFAULT_ITERS = {"case_b_40gen_4area": 500}
FLAG_KEYS = ("algo", "seed", "iters", "pop", "alpha", "pmut")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maed", description="Multi-area economic dispatch solver.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, search=True):
        p.add_argument("--instance", required=True, help="instance file or bundled instance name")
        p.add_argument("--out", help="output file (solve/evaluate) or directory (bench)")
        if not search:
            return
        # None means "not given", so config-file values can fill in
        p.add_argument("--algo", choices=("esoa", "ga"), default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--iters", type=int, default=None)
        p.add_argument("--pop", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None, help="ESOA attraction weight")
        p.add_argument("--pmut", type=float, default=None, help="mutation probability")
        p.add_argument("--config", help="JSON file with settings and engine overrides")

    p = sub.add_parser("solve", help="run one optimization")
    common(p)
    p.add_argument("--trace", help="convergence trace CSV path")

    p = sub.add_parser("evaluate", help="evaluate a stored solution")
    common(p, search=False)
    p.add_argument("--solution", required=True, help='JSON file with "p" and "t" lists')

    p = sub.add_parser("bench", help="multi-seed benchmark")
    common(p)
    p.add_argument("--runs", type=int, default=None)
    return parser


# ------------------------------------------------------------------ settings

def _read_config(path) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"config {path}: expected a JSON object")
    allowed = set(FLAG_KEYS) | {"runs", "esoa", "ga", "penalty", "tolerances"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise UsageError(f"config {path}: unknown keys {unknown}")
    return doc


def _env_seed() -> int | None:
    raw = os.environ.get("MAED_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"MAED_SEED must be an integer, got {raw!r}") from None


def _overrides(cls, values: dict, where: str):
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise UsageError(f"{where}: unknown fields {unknown}")
    return values


def resolve_settings(args, instance: ProblemInstance) -> dict:
    """Merge defaults, environment, config file and explicit flags."""
    cfg = _read_config(getattr(args, "config", None))
    s = {"algo": "esoa", "seed": 0, "iters": DEFAULT_ITERS.get(instance.name, 100),
         "pop": None, "alpha": None, "pmut": None, "runs": 11}
    env = _env_seed()
    if env is not None:
        s["seed"] = env
    for k in s:
        if k in cfg:
            s[k] = cfg[k]
    for k in FLAG_KEYS + ("runs",):
        v = getattr(args, k, None)
        if v is not None:
            s[k] = v
    if s["algo"] not in ("esoa", "ga"):
        raise UsageError(f"unknown algorithm {s['algo']!r}")
    for k in ("seed", "iters", "runs"):
        if isinstance(s[k], bool) or not isinstance(s[k], int):
            raise UsageError(f"{k} must be an integer")
    if s["iters"] < 0 or s["runs"] < 1:
        raise UsageError("iters must be >= 0 and runs >= 1")

    try:
        penalty = PenaltyWeights(**_overrides(PenaltyWeights, cfg.get("penalty", {}), "penalty"))
        tol = Tolerances(**_overrides(Tolerances, cfg.get("tolerances", {}), "tolerances"))
        if s["algo"] == "esoa":
            extra = dict(_overrides(esoa.EngineConfig, cfg.get("esoa", {}), "esoa"))
            for key, name in (("pop", "n_atoms"), ("alpha", "alpha"), ("pmut", "p_mut")):
                if s[key] is not None:
                    extra[name] = s[key]
            engine = esoa.EngineConfig(**{**extra, "max_iters": s["iters"], "seed": s["seed"],
                                          "penalty": penalty})
        else:
            if s["alpha"] is not None:
                raise UsageError("--alpha applies to esoa only")
            extra = dict(_overrides(ga.GaConfig, cfg.get("ga", {}), "ga"))
            for key, name in (("pop", "pop_size"), ("pmut", "p_mut")):
                if s[key] is not None:
                    extra[name] = s[key]
            engine = ga.GaConfig(**{**extra, "max_iters": s["iters"], "seed": s["seed"],
                                    "penalty": penalty})
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    s["engine"] = engine
    s["tolerances"] = tol
    return s


def run_once(instance, algo: str, engine, tolerances: Tolerances):
    if algo == "esoa":
        return esoa.solve(instance, engine, tolerances)
    return ga.ga_solve(instance, engine, tolerances)


# ------------------------------------------------------------------- reports

def solution_report(instance: ProblemInstance, dv: DecisionVector, tolerances: Tolerances) -> dict:
    """Per-generator and per-tie dispatch plus per-area loss and residual."""
    rep = evaluate(instance, dv, tolerances)
    return {
        "instance": instance.name,
        "cost": rep.cost,
        "feasible": rep.feasible,
        "total_loss": float(np.sum(rep.area_losses)),
        "p": dv.p.tolist(),
        "t": dv.t.tolist(),
        "generators": [{"id": g.id, "area": g.area, "p": float(dv.p[j])}
                       for j, g in enumerate(instance.generators)],
        "tie_lines": [{"from": tl.from_area, "to": tl.to_area, "capacity": tl.capacity,
                       "flow": float(dv.t[k])} for k, tl in enumerate(instance.tie_lines)],
        "areas": [{"id": a.id, "demand": a.demand, "loss": float(rep.area_losses[i]),
                   "balance_residual": float(rep.balance_residual[i])}
                  for i, a in enumerate(instance.areas)],
        "violations": {"bound": rep.bound_violation, "poz": rep.poz_violation,
                       "tie": rep.tie_violation,
                       "max_balance": float(np.max(np.abs(rep.balance_residual), initial=0.0))},
    }


def _dump(doc) -> str:
    return json.dumps(doc, indent=1) + "\n"


def _emit(doc, out):
    if out:
        write_atomic(out, _dump(doc))
    else:
        sys.stdout.write(_dump(doc))


def _settings_doc(s) -> dict:
    return {"algo": s["algo"], "seed": s["seed"], "iters": s["iters"],
            "engine": asdict(s["engine"]), "tolerances": asdict(s["tolerances"])}


# ------------------------------------------------------------------ commands

def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    s = resolve_settings(args, instance)
    res = run_once(instance, s["algo"], s["engine"], s["tolerances"])
    doc = solution_report(instance, res.best_vector, s["tolerances"])
    doc["settings"] = _settings_doc(s)
    _emit(doc, args.out)
    if args.trace:
        write_atomic(args.trace, res.trace.to_csv())
    status = "feasible" if doc["feasible"] else "INFEASIBLE"
    print(f"{instance.name} {s['algo']} seed={s['seed']} cost={doc['cost']:.4f} {status}",
          file=sys.stderr)
    return EXIT_OK if doc["feasible"] else EXIT_INFEASIBLE


def cmd_evaluate(args) -> int:
    instance = load_instance(args.instance)
    dv = load_solution(instance, args.solution)
    doc = solution_report(instance, dv, Tolerances())
    _emit(doc, args.out)
    return EXIT_OK if doc["feasible"] else EXIT_INFEASIBLE


def bench_summary(costs, feasible) -> dict:
    c = np.asarray(costs, dtype=float)
    return {"n_runs": int(c.size), "mean": float(c.mean()), "std": float(c.std()),
            "min": float(c.min()), "max": float(c.max()),
            "feasibility_rate": float(np.mean(feasible))}


def cmd_bench(args) -> int:
    instance = load_instance(args.instance)
    s = resolve_settings(args, instance)
    out = Path(args.out or f"bench_{instance.name}_{s['algo']}")
    runs, seconds = [], []
    for k in range(s["runs"]):
        seed = s["seed"] + k
        engine = replace(s["engine"], seed=seed)
        t0 = time.perf_counter()
        try:
            res = run_once(instance, s["algo"], engine, s["tolerances"])
        except (ValueError, FloatingPointError) as exc:
            runs.append({"seed": seed, "error": str(exc)})
            seconds.append(time.perf_counter() - t0)
            continue
        seconds.append(time.perf_counter() - t0)
        rep = res.best_report
        runs.append({"seed": seed, "cost": rep.cost, "feasible": rep.feasible,
                     "max_balance": float(np.max(np.abs(rep.balance_residual), initial=0.0))})
        write_atomic(out / f"trace_seed{seed}.csv", res.trace.to_csv())
        write_atomic(out / f"report_seed{seed}.json",
                     _dump(solution_report(instance, res.best_vector, s["tolerances"])))
        print(f"seed {seed}: cost={rep.cost:.4f} feasible={rep.feasible}", file=sys.stderr)

    done = [r for r in runs if "error" not in r]
    summary = {"instance": instance.name, "settings": _settings_doc(s), "runs": runs}
    if done:
        summary["stats"] = bench_summary([r["cost"] for r in done], [r["feasible"] for r in done])
    # wall time varies between invocations, so it lives outside the summary
    write_atomic(out / "summary.json", _dump(summary))
    write_atomic(out / "timing.json", _dump({"wall_time_s": float(sum(seconds)),
                                             "per_run_s": seconds}))
    ok = bool(done) and all(r["feasible"] for r in done) and len(done) == len(runs)
    return EXIT_OK if ok else EXIT_INFEASIBLE


COMMANDS = {"solve": cmd_solve, "evaluate": cmd_evaluate, "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"maed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFileError, InputError) as exc:
        print(f"maed: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
