"""Command-line surface: verdict tables, lifts, dimensions, enumeration.

Exit codes are a stable contract: 0 success, 1 expected-value mismatch,
2 input error.  Report directories receive tab-delimited tables with the
matplotlib renderings of the curves alongside.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from typing import Any, Optional

from . import curve as curvemod
from . import dimension as dim
from . import tropmap as tm
from . import wellspaced as ws
from .curve import (
    ChamberOrderError,
    NoAdmissibleRadiusError,
    Radius,
    alignment_chambers,
    circuit_of,
    contract_circle,
    contraction_radius_for_m,
    is_aligned,
    radial_distances,
)
from .fixtures import (
    Expectation,
    FixtureError,
    FixtureFile,
    encode_form,
    encode_radius,
    fixture_to_json,
    load_fixture,
)
from .forms import Chamber
from .tropmap import ALL_FACTORS, TargetModel

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2

_TARGET_RE = re.compile(r"^p(\d+)(?:xp(\d+))*$")


def parse_target(spec: str, divisors: tuple[tuple[int, int], ...] = ()) -> TargetModel:
    parts = spec.lower().split("x")
    factors = []
    for p in parts:
        if not p.startswith("p") or not p[1:].isdigit():
            raise FixtureError(f"bad target spec {spec!r}; expected e.g. p2 or p1xp1")
        factors.append(int(p[1:]))
    return TargetModel(tuple(factors), divisors)


def parse_degree(spec: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in spec.split(","))
    except ValueError as exc:
        raise FixtureError(f"bad degree spec {spec!r}") from exc


def _select_chamber(fixture: FixtureFile, name: Optional[str]) -> Chamber:
    if name is None:
        return fixture.resolved_chamber()
    match = re.match(r"^ch(\d+)$", name)
    if not match:
        raise FixtureError(f"--chamber expects chN, got {name!r}")
    chambers = alignment_chambers(fixture.curve)
    idx = int(match.group(1))
    if idx >= len(chambers):
        raise FixtureError(f"chamber {name} out of range; {len(chambers)} available")
    return chambers[idx]


# ---------------------------------------------------------------------------
# Verdict computation for `check`
# ---------------------------------------------------------------------------

def _json_radius(r: Radius, params: list[str]) -> Any:
    return encode_radius(r, params)


def compute_named(fixture: FixtureFile, ch: Chamber, name: str,
                  threshold: int) -> Any:
    """Evaluate one named output of a fixture, JSON-encoded for comparison."""
    params = list(fixture.params)
    c = fixture.curve
    m = fixture.map
    if name == "aligned":
        return is_aligned(c, ch)
    if name == "circuit_vertices":
        return sorted(circuit_of(c).vertices)
    if name == "positions_ok":
        return bool(tm.check_positions(m, ch)) if m else None
    if name == "balanced":
        return bool(tm.check_balancing(m)) if m else None
    if name == "transverse":
        if m is None:
            return None
        sub = tm.canonical_subdivision(m)
        return tm.is_transverse(m, sub, ch)
    if name == "wellspaced":
        return ws.is_wellspaced(m, ch, threshold).well_spaced if m else None
    if name == "wellspaced_reason":
        return ws.is_wellspaced(m, ch, threshold).reason if m else None
    match = re.match(r"^lambda:(.+)$", name)
    if match:
        return encode_form(curvemod.lambda_of(c, match.group(1)), params)
    match = re.match(r"^radius:m=(\d+)$", name)
    if match:
        return _json_radius(contraction_radius_for_m(c, int(match.group(1)), ch), params)
    match = re.match(r"^map_radius:(all|factor=\d+)$", name)
    if match:
        if m is None:
            return None
        arg = ALL_FACTORS if match.group(1) == "all" else int(match.group(1)[7:])
        return _json_radius(tm.map_contraction_radius(m, arg, ch), params)
    match = re.match(r"^contract_(branches|kind):(m=\d+|r=0)$", name)
    if match:
        if match.group(2) == "r=0":
            r = Radius.exact(curvemod.MonoidForm.zero())
        else:
            r = contraction_radius_for_m(c, int(match.group(2)[2:]), ch)
        contraction = contract_circle(c, r, ch)
        return (contraction.descriptor.branches if match.group(1) == "branches"
                else contraction.descriptor.kind)
    match = re.match(r"^new_legs:factor=(\d+)$", name)
    if match:
        if m is None:
            return None
        lifted = tm.complete_divisor(m, int(match.group(1)))
        return len(lifted.curve.legs) - len(m.curve.legs)
    raise FixtureError(f"unknown expected-value key {name!r}")


def cmd_check(args) -> int:
    fixture = load_fixture(args.fixture)
    ch = _select_chamber(fixture, args.chamber)
    rows: list[tuple[str, str, str, str, str]] = []
    failures = 0

    def add_row(name, expected, actual, provenance, ok):
        rows.append((name, expected, actual, provenance, "ok" if ok else "MISMATCH"))

    # standing verdicts
    for name in ("aligned", "positions_ok", "transverse", "wellspaced"):
        if name != "aligned" and fixture.map is None:
            continue
        if name == "wellspaced" and not is_aligned(fixture.curve, ch):
            continue
        try:
            actual = compute_named(fixture, ch, name, args.threshold)
        except (ValueError, ChamberOrderError) as exc:
            actual = f"error: {exc}"
        add_row(name, "-", _fmt(actual), "-", True)
    if fixture.map is not None and fixture.target.is_full_toric():
        add_row("balanced", "-",
                _fmt(compute_named(fixture, ch, "balanced", args.threshold)), "-", True)

    for name, exp in sorted(fixture.expected.items()):
        try:
            actual = compute_named(fixture, ch, name, args.threshold)
        except (ValueError, ChamberOrderError, NoAdmissibleRadiusError) as exc:
            actual = f"error: {exc}"
        ok = actual == exp.value
        failures += 0 if ok else 1
        add_row(name, _fmt(exp.value), _fmt(actual), exp.provenance, ok)

    width = max(len(r[0]) for r in rows) if rows else 4
    print(f"fixture: {args.fixture}")
    for name, expected, actual, prov, status in rows:
        print(f"  {name:<{width}}  {status:<8}  expected={expected}  "
              f"actual={actual}  [{prov}]")

    if args.report:
        _write_report(args.report, os.path.basename(args.fixture), rows,
                      fixture, ch)
    return EXIT_MISMATCH if failures else EXIT_OK


def _fmt(value: Any) -> str:
    return json.dumps(value, sort_keys=True) if not isinstance(value, str) else value


def _write_report(outdir: str, stem: str, rows, fixture: FixtureFile,
                  ch: Chamber) -> None:
    os.makedirs(outdir, exist_ok=True)
    stem = stem.rsplit(".", 1)[0]
    tsv = os.path.join(outdir, f"{stem}_report.tsv")
    with open(tsv, "w", encoding="utf-8") as fh:
        fh.write("name\texpected\tactual\tprovenance\tstatus\n")
        for r in rows:
            fh.write("\t".join(r) + "\n")
    from .render import render_curve
    render_curve(fixture.curve, ch, os.path.join(outdir, f"{stem}_curve.png"),
                 title=stem, tmap=fixture.map)


# ---------------------------------------------------------------------------
# complete / contract
# ---------------------------------------------------------------------------

def cmd_complete(args) -> int:
    fixture = load_fixture(args.fixture)
    if fixture.map is None:
        raise FixtureError("fixture has no map to complete")
    m = fixture.map
    if args.all:
        if m.target.is_full_toric():
            print("note: boundary already full; map unchanged", file=sys.stderr)
        lifted = tm.complete_to_toric(m)
        report = tm.check_balancing(lifted)
        print(f"balancing: {'ok' if report.ok else 'FAIL'}", file=sys.stderr)
        for v in report.violations:
            print(f"  {v}", file=sys.stderr)
    else:
        lifted = tm.complete_divisor(m, args.factor)
    out = FixtureFile(fixture.params, lifted.target, lifted.curve, lifted,
                      fixture.chamber, {})
    sys.stdout.write(fixture_to_json(out))
    return EXIT_OK


def cmd_contract(args) -> int:
    fixture = load_fixture(args.fixture)
    ch = _select_chamber(fixture, args.chamber)
    params = list(fixture.params)
    r = contraction_radius_for_m(fixture.curve, args.m, ch)
    contraction = contract_circle(fixture.curve, r, ch)
    d = contraction.descriptor
    print(f"radius: {json.dumps(encode_radius(r, params), sort_keys=True)}")
    print(f"branches: {d.branches}")
    print(f"kind: {d.kind}")
    print(f"local ring: {d.local_ring}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# dims
# ---------------------------------------------------------------------------

def _load_json(path: str, what: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise FixtureError(f"{what} file must be a JSON object")
    return data


def load_gamma(path: str) -> tuple[tuple[tuple[int, int], ...], dim.ContactMatrix]:
    data = _load_json(path, "gamma")
    allowed = {"format_version", "divisors", "matrix"}
    unknown = set(data) - allowed
    if unknown:
        raise FixtureError(f"unknown field(s) {sorted(unknown)} in gamma file")
    divisors = tuple(tuple(d) for d in data["divisors"])
    matrix = dim.ContactMatrix(tuple(tuple(r) for r in data["matrix"]))
    return divisors, matrix


def load_stratum(path: str) -> dim.StratumGraph:
    data = _load_json(path, "stratum")
    allowed = {"format_version", "ambient_dim", "num_edges", "vertices"}
    unknown = set(data) - allowed
    if unknown:
        raise FixtureError(f"unknown field(s) {sorted(unknown)} in stratum file")
    vertices = []
    for v in data["vertices"]:
        vallowed = {"genus", "markings", "target", "degree", "explicit_dim",
                    "provenance", "extra_params"}
        unknown = set(v) - vallowed
        if unknown:
            raise FixtureError(f"unknown field(s) {sorted(unknown)} in stratum vertex")
        target = None
        if v.get("target") is not None:
            target = TargetModel(tuple(v["target"]["factors"]),
                                 tuple(tuple(d) for d in v["target"].get("divisors", [])))
        vertices.append(dim.StratumVertex(
            genus=v["genus"],
            markings=v.get("markings", 0),
            target=target,
            degree=tuple(v["degree"]) if v.get("degree") is not None else None,
            explicit_dim=v.get("explicit_dim"),
            provenance=v.get("provenance"),
            extra_params=v.get("extra_params", 0),
        ))
    return dim.StratumGraph(tuple(vertices), data["num_edges"], data["ambient_dim"])


def cmd_dims(args) -> int:
    divisors: tuple[tuple[int, int], ...] = ()
    gamma = None
    if args.gamma:
        divisors, gamma = load_gamma(args.gamma)
    target = parse_target(args.target, divisors)
    degree = parse_degree(args.degree)
    expected = dim.expected_dim(args.genus, args.markings, target, degree)
    print(f"expected dim      g={args.genus} n={args.markings} "
          f"target={args.target} degree={args.degree}: {expected}")
    if gamma is not None:
        rel = dim.expected_dim_relative(args.genus, args.markings, target,
                                        degree, gamma)
        print(f"relative expected dim (sum of contact orders {gamma.total()}): {rel}")
    if args.stratum:
        graph = load_stratum(args.stratum)
        sdim = dim.stratum_dim(graph)
        print(f"stratum dim       {args.stratum}: {sdim}")
        if sdim == expected:
            print("FLAG equal-dimension strata: the stratum matches the "
                  "expected dimension of the main family; two top-dimensional "
                  "pieces, neither a degeneration of the other (the "
                  "factorization-only space is not logarithmically smooth).")
    return EXIT_OK


# ---------------------------------------------------------------------------
# enumerate
# ---------------------------------------------------------------------------

def stratum_lines(strata: list[ws.StratumType]) -> list[str]:
    lines = []
    for i, s in enumerate(strata):
        cons = "; ".join(repr(c) for c in s.chamber.constraints) or "top"
        lines.append(
            f"stratum {i:03d} | V={len(s.genus)} E={len(s.edges)} "
            f"| genus={s.genus} | deg={s.degrees} | markings={s.markings} "
            f"| chamber[{cons}] | aligned={_yn(s.aligned)} "
            f"transverse={_yn(s.transverse)} "
            f"wellspaced={_yn(s.well_spaced)}[{s.ws_reason}]")
    return lines


def _yn(b: bool) -> str:
    return "yes" if b else "no"


def stratum_dot(s: ws.StratumType, index: int) -> str:
    out = [f"graph stratum_{index:03d} {{"]
    for i, g in enumerate(s.genus):
        label = f"v{i} g={g} deg={s.degrees[i]}"
        shape = "doublecircle" if g else "circle"
        out.append(f'  v{i} [label="{label}", shape={shape}];')
    for a, b in s.edges:
        out.append(f"  v{a} -- v{b};")
    for k, v in enumerate(s.markings):
        out.append(f'  m{k + 1} [label="m{k + 1}", shape=plaintext];')
        out.append(f"  v{v} -- m{k + 1} [style=dashed];")
    out.append("}")
    return "\n".join(out) + "\n"


def cmd_enumerate(args) -> int:
    target = parse_target(args.target)
    degree = parse_degree(args.degree)
    if args.max_vertices < 1:
        print("warning: empty listing (max vertices < 1)", file=sys.stderr)
        return EXIT_OK
    guard = int(os.environ.get("TROPLOG_MAX_ENUM", 200_000))
    strata = ws.enumerate_strata(target, args.markings, degree,
                                 args.max_vertices, threshold=args.threshold,
                                 max_search=guard)
    lines = stratum_lines(strata)
    for line in lines:
        print(line)
    if args.dot:
        os.makedirs(args.dot, exist_ok=True)
        for i, s in enumerate(strata):
            with open(os.path.join(args.dot, f"stratum_{i:03d}.dot"), "w",
                      encoding="utf-8") as fh:
                fh.write(stratum_dot(s, i))
    if args.report:
        os.makedirs(args.report, exist_ok=True)
        with open(os.path.join(args.report, "strata.tsv"), "w",
                  encoding="utf-8") as fh:
            fh.write("index\tvertices\tedges\tgenus\tdegrees\tmarkings\t"
                     "aligned\ttransverse\twellspaced\treason\n")
            for i, s in enumerate(strata):
                fh.write(f"{i}\t{len(s.genus)}\t{len(s.edges)}\t{s.genus}\t"
                         f"{s.degrees}\t{s.markings}\t{_yn(s.aligned)}\t"
                         f"{_yn(s.transverse)}\t{_yn(s.well_spaced)}\t"
                         f"{s.ws_reason}\n")
        from .render import render_curve
        for i, s in enumerate(strata):
            render_curve(s.curve, s.chamber,
                         os.path.join(args.report, f"stratum_{i:03d}.png"),
                         title=f"stratum {i:03d}", tmap=s.map)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="troplog",
        description="Combinatorics of genus-1 logarithmic stable maps: "
                    "radii, lifts, well-spacedness, dimensions.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run verdicts of a fixture against its "
                                     "expected values")
    p.add_argument("fixture")
    p.add_argument("--chamber", help="select enumerated chamber chN")
    p.add_argument("--threshold", type=int, default=3, choices=(2, 3))
    p.add_argument("--report", help="write TSV report and curve figure here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("complete", help="lift a map by divisor completion")
    p.add_argument("fixture")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--factor", type=int)
    group.add_argument("--all", action="store_true")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("contract", help="contraction radius and singularity type")
    p.add_argument("fixture")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--chamber", help="select enumerated chamber chN")
    p.set_defaults(func=cmd_contract)

    p = sub.add_parser("dims", help="expected, relative and stratum dimensions")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--markings", type=int, default=0)
    p.add_argument("--target", required=True, help="e.g. p2 or p1xp1")
    p.add_argument("--degree", required=True, help="e.g. 2,2")
    p.add_argument("--gamma", help="contact matrix JSON file")
    p.add_argument("--stratum", help="stratum graph JSON file")
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("enumerate", help="list stratum types up to isomorphism")
    p.add_argument("--target", required=True)
    p.add_argument("--degree", required=True)
    p.add_argument("--markings", type=int, default=0)
    p.add_argument("--max-vertices", type=int, required=True)
    p.add_argument("--threshold", type=int, default=3, choices=(2, 3))
    p.add_argument("--dot", help="write one DOT file per stratum here")
    p.add_argument("--report", help="write TSV listing and figures here")
    p.set_defaults(func=cmd_enumerate)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON at line {exc.lineno} column {exc.colno}: "
              f"{exc.msg}", file=sys.stderr)
        return EXIT_INPUT
    except (FixtureError, FileNotFoundError, ws.SearchSpaceError,
            dim.ContactOrderError, tm.BoundaryFullError,
            tm.NotFullToricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
