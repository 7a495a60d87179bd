"""Well-spacedness verdicts against an exhaustive small-covector oracle,
invariance properties, and stratum enumeration."""

import itertools
import math
import random
from fractions import Fraction

import pytest

from troplog.curve import (
    Edge,
    Leg,
    TropicalCurve,
    Vertex,
    circuit_of,
    radial_distances,
)
from troplog.forms import (
    Chamber,
    Constraint,
    MonoidForm,
    Ordering,
    REL_LT,
    form_sub_sign,
    sample_point,
)
from troplog.tropmap import TargetModel, TropicalMap
from troplog.wellspaced import (
    CircuitNotContractedError,
    SearchSpaceError,
    StratumType,
    enumerate_strata,
    is_wellspaced,
    toric_wellspaced,
)

MF = MonoidForm


# ---------------------------------------------------------------------------
# fixtures: contracted circuit with decorated branches
# ---------------------------------------------------------------------------

def branch_map(r: int, branches, depth_param: int = 0):
    """A contracted genus-1 vertex inside an r-codimension stratum.

    ``branches`` is a list of (distance parameter index, slope vector);
    each branch is a zero-slope chain of that length ending in a vertex
    carrying one leg of the given contact/slope row.
    """
    h = MF.param(depth_param)
    verts = [Vertex("c", 1)]
    edges, legs = [], []
    pos = {"c": tuple(h for _ in range(r))}
    slope, contact, deg = {}, {}, {"c": (0,)}
    for i, (dparam, s) in enumerate(branches):
        u = f"u{i}"
        verts.append(Vertex(u, 0))
        edges.append(Edge(f"e{i}", ("c", u), MF.param(dparam)))
        slope[f"e{i}"] = tuple(0 for _ in range(r))
        pos[u] = pos["c"]
        legs.append(Leg(f"l{i}", u, f"m{i}"))
        slope[f"l{i}"] = tuple(s)
        contact[f"m{i}"] = tuple(s)
        deg[u] = (1,)
    nparams = max([depth_param] + [d for d, _ in branches]) + 1
    curve = TropicalCurve(tuple(verts), tuple(edges), tuple(legs), nparams)
    target = TargetModel((max(r, 1) + 1,), tuple((0, k) for k in range(r)))
    return TropicalMap(curve, target, deg, pos, slope, contact)


# ---------------------------------------------------------------------------
# toric condition: worked examples
# ---------------------------------------------------------------------------

def test_three_equal_branches_pass():
    m = branch_map(1, [(1, (1,)), (1, (1,)), (1, (1,))])
    assert toric_wellspaced(m, Chamber.top(2)).well_spaced


def test_unique_minimum_fails():
    m = branch_map(1, [(1, (1,)), (2, (1,))])
    ch = Chamber.top(3).with_constraints([Constraint(MF.param(1), REL_LT,
                                                     MF.param(2))])
    verdict = toric_wellspaced(m, ch)
    assert not verdict.well_spaced
    assert verdict.reason == "toric-condition-failed"
    assert verdict.covector == (1,)


def test_r_zero_block_vacuous(fig3):
    verdict = toric_wellspaced(fig3.map, fig3.resolved_chamber())
    assert verdict.well_spaced
    assert verdict.reason == "toric-condition-passed"


def test_circuit_not_contracted_raises():
    # a two-vertex circuit whose cycle edge has nonzero slope in the block
    x = MF.param(0)
    curve = TropicalCurve(
        (Vertex("a", 0), Vertex("b", 0)),
        (Edge("p", ("a", "b"), x), Edge("q", ("a", "b"), x)),
        (Leg("l", "a", "m"),), 1)
    m = TropicalMap(curve, TargetModel((1,), ((0, 0),)),
                    {"a": (0,), "b": (0,)},
                    {"a": (x,), "b": (x.scale(2),)},
                    {"p": (1,), "q": (1,), "l": (0,)}, {"m": (0,)})
    with pytest.raises(CircuitNotContractedError):
        toric_wellspaced(m, Chamber.top(1))


def test_threshold_knob():
    m = branch_map(1, [(1, (1,)), (1, (1,))])
    ch = Chamber.top(2)
    assert not toric_wellspaced(m, ch, threshold=3).well_spaced
    assert toric_wellspaced(m, ch, threshold=2).well_spaced


def test_sharpness_removing_a_minimal_branch():
    """A passing threshold-3 configuration fails after deleting one branch."""
    three = branch_map(1, [(1, (1,)), (1, (1,)), (1, (1,))])
    assert toric_wellspaced(three, Chamber.top(2)).well_spaced
    two = branch_map(1, [(1, (1,)), (1, (1,))])
    assert not toric_wellspaced(two, Chamber.top(2)).well_spaced


# ---------------------------------------------------------------------------
# is_wellspaced routing
# ---------------------------------------------------------------------------

def test_positive_degree_short_circuit(ex42):
    verdict = is_wellspaced(ex42.map, Chamber.top(0))
    assert verdict.well_spaced
    assert verdict.reason == "circuit-positive-degree"


def test_contracted_two_branch_fixture_fails():
    fx = branch_map(1, [(1, (1,)), (2, (1,))])
    ch = Chamber.top(3).with_constraints([Constraint(MF.param(1), REL_LT,
                                                     MF.param(2))])
    verdict = is_wellspaced(fx, ch)
    assert not verdict.well_spaced


def test_interior_contracted_circuit_passes(fig3):
    # circuit degree (0,0) and no divisor coordinates: the r = 0 case
    verdict = is_wellspaced(fig3.map, fig3.resolved_chamber())
    assert verdict.well_spaced
    assert verdict.reason == "toric-condition-passed"


# ---------------------------------------------------------------------------
# oracle: exhaustive small covectors
# ---------------------------------------------------------------------------

def primitive_covectors(r: int, bound: int = 3):
    seen = set()
    for chi in itertools.product(range(-bound, bound + 1), repeat=r):
        if not any(chi):
            continue
        g = math.gcd(*(abs(x) for x in chi))
        chi = tuple(x // g for x in chi)
        lead = next(x for x in chi if x)
        if lead < 0:
            chi = tuple(-x for x in chi)
        seen.add(chi)
    return sorted(seen)


def oracle_toric_wellspaced(m: TropicalMap, ch: Chamber, block, threshold=3,
                            bound=3):
    """Independent decision: scan every primitive covector with small entries.

    Reimplements the covector condition from scratch (numeric subgraph
    growth per covector) rather than via arrangement flats.
    """
    r = len(block)
    if r == 0:
        return True
    circ = circuit_of(m.curve)
    dist = radial_distances(m.curve)
    point = sample_point(ch, random.Random(3))

    def pairing(chi, vec):
        return sum(c * vec[j] for c, j in zip(chi, block))

    for chi in primitive_covectors(r, bound):
        component = set(circ.vertices)
        frontier = list(circ.vertices)
        while frontier:
            vid = frontier.pop()
            for e in m.curve.edges_at(vid):
                w = e.other(vid)
                if w not in component and pairing(chi, m.slope[e.id]) == 0:
                    component.add(w)
                    frontier.append(w)
        flags = []
        for vid in component:
            for e in m.curve.edges_at(vid):
                if e.other(vid) in component and e.ends[0] != e.ends[1]:
                    continue
                if pairing(chi, m.slope[e.id]) != 0:
                    flags.append(dist[vid].evaluate(point))
            for l in m.curve.legs_at(vid):
                if pairing(chi, m.contact[l.label]) != 0:
                    flags.append(dist[vid].evaluate(point))
        if flags and sum(1 for d in flags if d == min(flags)) < threshold:
            return False
    return True


def random_branch_instance(rng: random.Random, r: int):
    nb = rng.randint(1, 5)
    branches = []
    for i in range(nb):
        slope = tuple(rng.randint(-1, 1) for _ in range(r))
        if not any(slope):
            slope = (1,) + (0,) * (r - 1)
        branches.append((i + 1, slope))
    m = branch_map(r, branches)
    # a random total order of the branch distances
    order = list(range(1, nb + 1))
    rng.shuffle(order)
    cons = [Constraint(MF.param(a), REL_LT, MF.param(b))
            for a, b in zip(order, order[1:])]
    ch = Chamber.top(nb + 1).with_constraints(cons)
    return m, ch


@pytest.mark.parametrize("r", [1, 2, 3])
def test_flat_scan_agrees_with_small_covector_oracle(r, rng):
    """Acceptance suite 7(d): flats versus exhaustive covectors, r <= 3."""
    instances = {1: 40, 2: 34, 3: 26}[r]
    for _ in range(instances):
        m, ch = random_branch_instance(rng, r)
        block = tuple(range(r))
        mine = toric_wellspaced(m, ch, block).well_spaced
        oracle = oracle_toric_wellspaced(m, ch, block)
        assert mine == oracle


# ---------------------------------------------------------------------------
# invariance properties
# ---------------------------------------------------------------------------

def rescale_map(m: TropicalMap, c: Fraction) -> TropicalMap:
    curve = TropicalCurve(
        m.curve.vertices,
        tuple(Edge(e.id, e.ends, e.length.scale(c)) for e in m.curve.edges),
        m.curve.legs, m.curve.num_params)
    position = {v: tuple(p.scale(c) for p in ps) for v, ps in m.position.items()}
    return TropicalMap(curve, m.target, m.multidegree, position, m.slope,
                       m.contact)


def test_verdict_invariant_under_rescaling(rng):
    """Acceptance suite 7(c), rescaling half."""
    for _ in range(100):
        r = rng.randint(1, 2)
        m, ch = random_branch_instance(rng, r)
        before = is_wellspaced(m, ch).well_spaced
        c = Fraction(rng.randint(1, 7), rng.randint(1, 4))
        assert is_wellspaced(rescale_map(m, c), ch).well_spaced == before


def subdivide_edge(m: TropicalMap, eid: str) -> TropicalMap:
    """Split one edge into two halves of the same total length."""
    e = next(x for x in m.curve.edges if x.id == eid)
    half = e.length.scale(Fraction(1, 2))
    mid = f"{eid}~mid"
    curve = TropicalCurve(
        m.curve.vertices + (Vertex(mid, 0),),
        tuple(x for x in m.curve.edges if x.id != eid)
        + (Edge(f"{eid}~1", (e.ends[0], mid), half),
           Edge(f"{eid}~2", (mid, e.ends[1]), half)),
        m.curve.legs, m.curve.num_params)
    s = m.slope[eid]
    pos = dict(m.position)
    base = m.position[e.ends[0]]
    pos[mid] = tuple(
        base[k] + half.scale(s[k]) if s[k] >= 0 else base[k].try_sub(half.scale(-s[k]))
        for k in range(len(base)))
    slope = {k: v for k, v in m.slope.items() if k != eid}
    slope[f"{eid}~1"] = s
    slope[f"{eid}~2"] = s
    deg = dict(m.multidegree)
    deg[mid] = tuple(0 for _ in m.target.factors)
    return TropicalMap(curve, m.target, deg, pos, slope, m.contact)


def test_verdict_invariant_under_subdivision(rng):
    """Acceptance suite 7(c), two-valent subdivision half."""
    for _ in range(100):
        r = rng.randint(1, 2)
        m, ch = random_branch_instance(rng, r)
        before = is_wellspaced(m, ch).well_spaced
        eid = rng.choice([e.id for e in m.curve.edges])
        assert is_wellspaced(subdivide_edge(m, eid), ch).well_spaced == before


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def test_enumerate_smallest_instance():
    strata = enumerate_strata(TargetModel((1,)), 0, (1,), 1)
    assert len(strata) == 1
    (s,) = strata
    assert s.genus == (1,)
    assert s.degrees == ((1,),)
    assert s.well_spaced and s.ws_reason == "circuit-positive-degree"


def test_enumerate_contains_quadric_stratum():
    strata = enumerate_strata(TargetModel((1, 1)), 0, (2, 2), 2)
    wanted = [s for s in strata
              if s.genus == (1, 0) and s.degrees == ((2, 0), (0, 2))
              and len(s.edges) == 1]
    assert len(wanted) == 1
    assert wanted[0].aligned and wanted[0].transverse


def test_enumerate_degree_zero_rejected():
    assert enumerate_strata(TargetModel((1,)), 0, (0,), 2) == []


def test_enumerate_marked_degree_zero_keeps_stable_types():
    strata = enumerate_strata(TargetModel((1,)), 1, (0,), 1)
    # one marked elliptic vertex of degree zero is a stable curve type
    assert [s.genus for s in strata] == [(1,)]


def test_enumerate_deterministic():
    a = enumerate_strata(TargetModel((1, 1)), 0, (2, 2), 2)
    b = enumerate_strata(TargetModel((1, 1)), 0, (2, 2), 2)
    assert [s.key() for s in a] == [s.key() for s in b]


def test_enumerate_guard():
    with pytest.raises(SearchSpaceError, match="search space too large"):
        enumerate_strata(TargetModel((1, 1)), 0, (2, 2), 4, max_search=10)


def test_enumerate_rejects_divisor_targets():
    with pytest.raises(ValueError, match="empty divisor set"):
        enumerate_strata(TargetModel((1,), ((0, 0),)), 0, (1,), 1)


def test_enumerate_flags_uniform_within_skeleton():
    """Verdicts for divisor-free targets do not depend on the chamber."""
    strata = enumerate_strata(TargetModel((1, 1)), 0, (2, 2), 2)
    by_skeleton = {}
    for s in strata:
        by_skeleton.setdefault((s.genus, s.degrees, s.edges), set()).add(
            (s.well_spaced, s.ws_reason))
    for flags in by_skeleton.values():
        assert len(flags) == 1
