"""Versioned JSON fixture files for curves, maps and expected values.

Rational coefficients are carried as strings ("1/3", never 0.333...) so
every fixture survives a parse/serialize round trip losslessly.  Unknown
fields are rejected: a fixture that parses is fully understood.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .curve import (
    Edge,
    Leg,
    OFFSET_INFINITE,
    Radius,
    TropicalCurve,
    Vertex,
    alignment_chambers,
)
from .forms import Chamber, Constraint, MonoidForm, REL_EQ, REL_LE, REL_LT
from .tropmap import TargetModel, TropicalMap

FORMAT_VERSION = 1
PROVENANCES = ("PAPER", "TRIVIAL", "DERIVED")


class FixtureError(ValueError):
    pass


def _check_keys(obj: dict, allowed: set[str], where: str, required: set[str] = set()):
    unknown = set(obj) - allowed
    if unknown:
        raise FixtureError(f"unknown field(s) {sorted(unknown)} in {where}")
    missing = required - set(obj)
    if missing:
        raise FixtureError(f"missing field(s) {sorted(missing)} in {where}")


# ---------------------------------------------------------------------------
# Forms, chambers, radii
# ---------------------------------------------------------------------------

def encode_form(f: MonoidForm, params: list[str]) -> dict[str, str]:
    return {params[i]: str(c) for i, c in f.coeffs}


def decode_form(obj: Any, params: list[str], where: str) -> MonoidForm:
    if not isinstance(obj, dict):
        raise FixtureError(f"{where}: a form must be an object of rational strings")
    coeffs = {}
    for name, val in obj.items():
        if name not in params:
            raise FixtureError(f"{where}: unknown parameter {name!r}")
        try:
            coeffs[params.index(name)] = Fraction(val)
        except (ValueError, ZeroDivisionError) as exc:
            raise FixtureError(f"{where}: bad rational {val!r}") from exc
    try:
        return MonoidForm.from_dict(coeffs)
    except ValueError as exc:
        raise FixtureError(f"{where}: {exc}") from exc


def encode_chamber(ch: Chamber, params: list[str]) -> dict:
    return {"constraints": [[encode_form(c.lhs, params), c.rel,
                             encode_form(c.rhs, params)]
                            for c in ch.constraints]}


def decode_chamber(obj: Any, params: list[str]) -> Chamber:
    if not isinstance(obj, dict):
        raise FixtureError("chamber must be an object or the string 'generic'")
    _check_keys(obj, {"constraints"}, "chamber", {"constraints"})
    cons = []
    for i, triple in enumerate(obj["constraints"]):
        if not (isinstance(triple, list) and len(triple) == 3):
            raise FixtureError(f"chamber constraint {i} must be [lhs, rel, rhs]")
        lhs = decode_form(triple[0], params, f"constraint {i} lhs")
        rhs = decode_form(triple[2], params, f"constraint {i} rhs")
        if triple[1] not in (REL_LT, REL_EQ, REL_LE):
            raise FixtureError(f"constraint {i}: bad relation {triple[1]!r}")
        cons.append(Constraint(lhs, triple[1], rhs))
    return Chamber(tuple(cons), len(params))


def encode_radius(r: Radius, params: list[str]) -> dict:
    if r.is_infinite():
        return {"base": None, "offset": OFFSET_INFINITE}
    return {"base": encode_form(r.base, params), "offset": r.offset}


# ---------------------------------------------------------------------------
# Fixture files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expectation:
    value: Any
    provenance: str
    note: str = ""


@dataclass(frozen=True)
class FixtureFile:
    params: tuple[str, ...]
    target: TargetModel
    curve: TropicalCurve
    map: Optional[TropicalMap]
    chamber: Any  # Chamber, or the string "generic"
    expected: dict[str, Expectation] = field(default_factory=dict)

    def resolved_chamber(self) -> Chamber:
        """The fixture chamber, with the 'generic' shorthand expanded.

        Generic means the first feasible refinement, in enumeration order,
        whose distance levels are all distinct (falling back to the first
        refinement when no strict total order is feasible).
        """
        if isinstance(self.chamber, Chamber):
            return self.chamber
        chambers = alignment_chambers(self.curve)
        for ch in chambers:
            if not any(c.rel == REL_EQ for c in ch.constraints):
                return ch
        return chambers[0]


def parse_fixture(text: str) -> FixtureFile:
    data = json.loads(text)
    if not isinstance(data, dict):
        raise FixtureError("fixture must be a JSON object")
    _check_keys(data, {"format_version", "params", "target", "curve", "map",
                       "chamber", "expected"},
                "fixture", {"format_version", "params", "target", "curve", "chamber"})
    if data["format_version"] != FORMAT_VERSION:
        raise FixtureError(f"unsupported format_version {data['format_version']!r}")
    params = list(data["params"])
    if len(set(params)) != len(params):
        raise FixtureError("duplicate parameter names")

    tobj = data["target"]
    _check_keys(tobj, {"factors", "divisors"}, "target", {"factors"})
    try:
        target = TargetModel(tuple(tobj["factors"]),
                             tuple(tuple(d) for d in tobj.get("divisors", [])))
    except (ValueError, TypeError) as exc:
        raise FixtureError(f"target: {exc}") from exc

    cobj = data["curve"]
    _check_keys(cobj, {"vertices", "edges", "legs"}, "curve", {"vertices"})
    vertices = []
    for v in cobj["vertices"]:
        _check_keys(v, {"id", "genus"}, "vertex", {"id"})
        vertices.append(Vertex(v["id"], v.get("genus", 0)))
    edges = []
    for e in cobj.get("edges", []):
        _check_keys(e, {"id", "ends", "length"}, f"edge", {"id", "ends", "length"})
        edges.append(Edge(e["id"], tuple(e["ends"]),
                          decode_form(e["length"], params, f"edge {e['id']}")))
    legs = []
    for l in cobj.get("legs", []):
        _check_keys(l, {"id", "vertex", "label"}, "leg", {"id", "vertex", "label"})
        legs.append(Leg(l["id"], l["vertex"], l["label"]))
    try:
        curve = TropicalCurve(tuple(vertices), tuple(edges), tuple(legs), len(params))
    except ValueError as exc:
        raise FixtureError(f"curve: {exc}") from exc

    tmap = None
    if "map" in data and data["map"] is not None:
        mobj = data["map"]
        _check_keys(mobj, {"multidegree", "position", "slope", "contact"}, "map",
                    {"multidegree", "position", "slope", "contact"})
        try:
            tmap = TropicalMap(
                curve, target,
                {v: tuple(d) for v, d in mobj["multidegree"].items()},
                {v: tuple(decode_form(p, params, f"position of {v}") for p in ps)
                 for v, ps in mobj["position"].items()},
                {k: tuple(s) for k, s in mobj["slope"].items()},
                {k: tuple(r) for k, r in mobj["contact"].items()},
            )
        except ValueError as exc:
            raise FixtureError(f"map: {exc}") from exc

    chamber: Any
    if data["chamber"] == "generic":
        chamber = "generic"
    else:
        chamber = decode_chamber(data["chamber"], params)

    expected: dict[str, Expectation] = {}
    for name, eobj in data.get("expected", {}).items():
        _check_keys(eobj, {"value", "provenance", "note"}, f"expected[{name}]",
                    {"value", "provenance"})
        if eobj["provenance"] not in PROVENANCES:
            raise FixtureError(f"expected[{name}]: provenance must be one of "
                               f"{PROVENANCES}, got {eobj['provenance']!r}")
        expected[name] = Expectation(eobj["value"], eobj["provenance"],
                                     eobj.get("note", ""))

    return FixtureFile(tuple(params), target, curve, tmap, chamber, expected)


def fixture_to_json(f: FixtureFile) -> str:
    params = list(f.params)
    data: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "params": params,
        "target": {"factors": list(f.target.factors),
                   "divisors": [list(d) for d in f.target.divisors]},
        "curve": {
            "vertices": [{"id": v.id, "genus": v.genus} for v in f.curve.vertices],
            "edges": [{"id": e.id, "ends": list(e.ends),
                       "length": encode_form(e.length, params)}
                      for e in f.curve.edges],
            "legs": [{"id": l.id, "vertex": l.vertex, "label": l.label}
                     for l in f.curve.legs],
        },
        "chamber": ("generic" if f.chamber == "generic"
                    else encode_chamber(f.chamber, params)),
    }
    if f.map is not None:
        m = f.map
        data["map"] = {
            "multidegree": {v: list(d) for v, d in sorted(m.multidegree.items())},
            "position": {v: [encode_form(p, params) for p in ps]
                         for v, ps in sorted(m.position.items())},
            "slope": {k: list(s) for k, s in sorted(m.slope.items())},
            "contact": {k: list(r) for k, r in sorted(m.contact.items())},
        }
    if f.expected:
        data["expected"] = {
            name: ({"value": e.value, "provenance": e.provenance}
                   | ({"note": e.note} if e.note else {}))
            for name, e in f.expected.items()}
    return json.dumps(data, indent=2) + "\n"


def load_fixture(path: str) -> FixtureFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_fixture(fh.read())
