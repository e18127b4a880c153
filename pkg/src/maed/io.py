"""Instance, solution and report files (JSON)."""

from __future__ import annotations

import json
import os
import tempfile
from importlib import resources
from pathlib import Path
from typing import Any

from .model import (Area, DecisionVector, FuelOption, Generator, LossModel, ProblemInstance,
                    ProhibitedZone, TieLine, validate_instance)

FORMAT = "maed-instance"
VERSION = 1
BUNDLED = ("case_a_6gen_2area", "case_b_40gen_4area")


class InstanceFileError(ValueError):
    """Unreadable or invalid instance file; ``errors`` lists every problem found."""

    def __init__(self, source: str, errors: list[str]):
        self.source = source
        self.errors = list(errors)
        super().__init__(f"{source}: " + "; ".join(self.errors))


class _Reader:
    # walks a parsed document, collecting errors with their JSON path
    def __init__(self):
        self.errors: list[str] = []

    def get(self, obj, key, path, kind=float, default=...):
        if not isinstance(obj, dict):
            self.errors.append(f"{path}: expected an object")
            return None
        if key not in obj:
            if default is not ...:
                return default
            self.errors.append(f"{path}.{key}: missing")
            return None
        return self.coerce(obj[key], f"{path}.{key}", kind)

    def coerce(self, value, path, kind):
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                self.errors.append(f"{path}: expected a number, got {value!r}")
                return None
            return float(value)
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                self.errors.append(f"{path}: expected an integer, got {value!r}")
                return None
            return value
        if kind is str:
            if not isinstance(value, str):
                self.errors.append(f"{path}: expected a string, got {value!r}")
                return None
            return value
        if kind is list:
            if not isinstance(value, list):
                self.errors.append(f"{path}: expected a list")
                return []
            return value
        return value


def instance_from_dict(doc: Any, source: str = "<instance>") -> ProblemInstance:
    rd = _Reader()
    if not isinstance(doc, dict):
        raise InstanceFileError(source, ["top level: expected an object"])
    if doc.get("format", FORMAT) != FORMAT:
        rd.errors.append(f"format: expected {FORMAT!r}, got {doc.get('format')!r}")
    if doc.get("version", VERSION) != VERSION:
        rd.errors.append(f"version: unsupported version {doc.get('version')!r}")

    areas = []
    for i, a in enumerate(rd.get(doc, "areas", "$", list) or []):
        path = f"areas[{i}]"
        loss = None
        ld = rd.get(a, "loss", path, dict, default=None)
        if ld is not None:
            lp = f"{path}.loss"
            B = [[rd.coerce(v, f"{lp}.B[{q}][{j}]", float) for j, v in enumerate(rd.coerce(row, f"{lp}.B[{q}]", list))]
                 for q, row in enumerate(rd.get(ld, "B", lp, list) or [])]
            B0 = [rd.coerce(v, f"{lp}.B0[{j}]", float) for j, v in enumerate(rd.get(ld, "B0", lp, list) or [])]
            B00 = rd.get(ld, "B00", lp, float, default=0.0)
            if not rd.errors:
                loss = LossModel(tuple(map(tuple, B)), tuple(B0), B00)
        areas.append((rd.get(a, "id", path, str, default=f"A{i + 1}"), rd.get(a, "demand", path), loss))

    gens = []
    for j, g in enumerate(rd.get(doc, "generators", "$", list) or []):
        path = f"generators[{j}]"
        fuels = []
        for s, fo in enumerate(rd.get(g, "fuel", path, list) or []):
            fp = f"{path}.fuel[{s}]"
            fuels.append(tuple(rd.get(fo, k, fp, default=0.0 if k in "ef" else ...)
                               for k in ("p_low", "p_high", "a", "b", "c", "e", "f")))
        zones = []
        for z, zone in enumerate(rd.get(g, "poz", path, list, default=[])):
            zp = f"{path}.poz[{z}]"
            zone = rd.coerce(zone, zp, list)
            if len(zone) != 2:
                rd.errors.append(f"{zp}: expected [low, up]")
                continue
            zones.append((rd.coerce(zone[0], f"{zp}[0]", float), rd.coerce(zone[1], f"{zp}[1]", float)))
        gens.append((rd.get(g, "id", path, str, default=f"G{j + 1}"), rd.get(g, "area", path, int),
                     rd.get(g, "p_min", path), rd.get(g, "p_max", path), fuels, zones))

    ties = []
    for k, t in enumerate(rd.get(doc, "tie_lines", "$", list, default=[])):
        path = f"tie_lines[{k}]"
        ties.append((rd.get(t, "from", path, int), rd.get(t, "to", path, int), rd.get(t, "capacity", path)))

    name = rd.get(doc, "name", "$", str)
    provenance = rd.get(doc, "provenance", "$", str, default="")
    if rd.errors:
        raise InstanceFileError(source, rd.errors)

    instance = ProblemInstance(
        name=name,
        areas=tuple(Area(aid, dem, loss) for aid, dem, loss in areas),
        generators=tuple(
            Generator(gid, area, pmin, pmax, tuple(FuelOption(*fo) for fo in fuels),
                      tuple(ProhibitedZone(lo, up) for lo, up in zones))
            for gid, area, pmin, pmax, fuels, zones in gens),
        tie_lines=tuple(TieLine(*t) for t in ties),
        provenance=provenance,
    )
    errs = validate_instance(instance)
    if errs:
        raise InstanceFileError(source, errs)
    return instance


def instance_to_dict(instance: ProblemInstance) -> dict:
    areas = []
    for a in instance.areas:
        d: dict[str, Any] = {"id": a.id, "demand": a.demand}
        if a.loss is not None:
            d["loss"] = {"B": [list(r) for r in a.loss.B], "B0": list(a.loss.B0), "B00": a.loss.B00}
        areas.append(d)
    return {
        "format": FORMAT,
        "version": VERSION,
        "name": instance.name,
        "provenance": instance.provenance,
        "areas": areas,
        "generators": [
            {"id": g.id, "area": g.area, "p_min": g.p_min, "p_max": g.p_max,
             "fuel": [{"p_low": o.p_low, "p_high": o.p_high, "a": o.a, "b": o.b, "c": o.c,
                       "e": o.e, "f": o.f} for o in g.fuel_options],
             "poz": [[z.low, z.up] for z in g.poz]}
            for g in instance.generators],
        "tie_lines": [{"from": t.from_area, "to": t.to_area, "capacity": t.capacity}
                      for t in instance.tie_lines],
    }


def dumps_instance(instance: ProblemInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=1)


def loads_instance(text: str, source: str = "<string>") -> ProblemInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFileError(source, [f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    return instance_from_dict(doc, source)


def resolve_instance_path(ref: str | os.PathLike) -> Path:
    """A file path, or the name of a bundled instance."""
    p = Path(ref)
    if p.exists():
        return p
    name = p.name[:-5] if p.name.endswith(".json") else p.name
    if name in BUNDLED and str(p.parent) == ".":
        return Path(str(resources.files("maed") / "data" / f"{name}.json"))
    return p


def load_instance(path: str | os.PathLike) -> ProblemInstance:
    """Read and validate an instance file; bundled instance names are accepted."""
    path = resolve_instance_path(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceFileError(str(path), [exc.strerror or str(exc)]) from None
    return loads_instance(text, str(path))


def bundled(name: str) -> ProblemInstance:
    return load_instance(name)


def save_instance(instance: ProblemInstance, path: str | os.PathLike):
    write_atomic(path, dumps_instance(instance) + "\n")


def load_solution(instance: ProblemInstance, path: str | os.PathLike) -> DecisionVector:
    """Read ``{"p": [...], "t": [...]}``; solve reports carry the same keys."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InstanceFileError(str(path), [exc.strerror or str(exc)]) from None
    except json.JSONDecodeError as exc:
        raise InstanceFileError(str(path), [f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    rd = _Reader()
    p = [rd.coerce(v, f"p[{i}]", float) for i, v in enumerate(rd.get(doc, "p", "$", list) or [])]
    t = [rd.coerce(v, f"t[{i}]", float) for i, v in enumerate(rd.get(doc, "t", "$", list, default=[]))]
    if rd.errors:
        raise InstanceFileError(str(path), rd.errors)
    return DecisionVector(p, t)


def write_atomic(path: str | os.PathLike, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
