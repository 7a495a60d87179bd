"""Tropical stable maps to the orthant complex of a product of projective spaces.

The target pair is a product of projective spaces together with a subset
of its toric boundary divisors; its tropicalization is the nonnegative
orthant with one coordinate per divisor component.  Maps carry vertex
positions (monoid forms), integer germ slopes, per-vertex multidegrees
and the contact-order matrix of the markings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

from .curve import (
    ChamberOrderError,
    Edge,
    Leg,
    Radius,
    TropicalCurve,
    Vertex,
    circuit_of,
    radial_distances,
)
from .forms import (
    Chamber,
    Constraint,
    MonoidForm,
    Ordering,
    REL_EQ,
    form_sub_sign,
)


class BoundaryFullError(ValueError):
    pass


class NotFullToricError(ValueError):
    pass


ALL_FACTORS = "all"


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TargetModel:
    """A product of projective spaces with a chosen set of boundary divisors.

    ``factors[i]`` is the dimension of the i-th projective space; each
    divisor is a coordinate hyperplane, recorded as (factor index,
    coordinate index).  The tropicalization of the pair is the orthant
    with one coordinate per listed divisor.
    """

    factors: tuple[int, ...]
    divisors: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if any(n < 1 for n in self.factors):
            raise ValueError("projective-space dimensions must be positive")
        seen = set()
        for fi, ci in self.divisors:
            if not (0 <= fi < len(self.factors)):
                raise ValueError(f"divisor refers to unknown factor {fi}")
            if not (0 <= ci <= self.factors[fi]):
                raise ValueError(f"coordinate {ci} out of range for factor {fi}")
            if (fi, ci) in seen:
                raise ValueError("divisor entries must be distinct")
            seen.add((fi, ci))

    @property
    def num_divisors(self) -> int:
        return len(self.divisors)

    @property
    def num_factors(self) -> int:
        return len(self.factors)

    @property
    def dim(self) -> int:
        return sum(self.factors)

    def divisor_indices_of_factor(self, fi: int) -> list[int]:
        return [j for j, (f, _) in enumerate(self.divisors) if f == fi]

    def missing_coordinates(self, fi: int) -> list[int]:
        present = {c for f, c in self.divisors if f == fi}
        return [c for c in range(self.factors[fi] + 1) if c not in present]

    def is_full_toric(self) -> bool:
        return all(not self.missing_coordinates(i) for i in range(self.num_factors))

    def fan_ray(self, fi: int, ci: int) -> tuple[int, ...]:
        """Image of the coordinate divisor's ray in the factor's fan in Z^n_i.

        Coordinates 0..n_i-1 map to the basis vectors, the last coordinate
        to minus their sum.
        """
        n = self.factors[fi]
        if ci < n:
            return tuple(1 if k == ci else 0 for k in range(n))
        return tuple([-1] * n)


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------

IntVec = tuple[int, ...]


@dataclass(frozen=True)
class TropicalMap:
    """A genus-1 tropical curve mapped to the orthant complex of the target.

    ``position[v]`` has one monoid form per divisor coordinate; ``slope``
    assigns an integer vector to every edge (oriented from ``ends[0]`` to
    ``ends[1]``) and every leg (oriented outward); ``contact[label]`` is
    the marking's row of the contact-order matrix.
    """

    curve: TropicalCurve
    target: TargetModel
    multidegree: dict[str, IntVec]
    position: dict[str, tuple[MonoidForm, ...]]
    slope: dict[str, IntVec]
    contact: dict[str, IntVec]

    def __post_init__(self):
        s = self.target.num_divisors
        a = self.target.num_factors
        for v in self.curve.vertices:
            if v.id not in self.multidegree or len(self.multidegree[v.id]) != a:
                raise ValueError(f"multidegree missing or malformed for {v.id}")
            if any(d < 0 for d in self.multidegree[v.id]):
                raise ValueError(f"negative degree at {v.id}")
            if v.id not in self.position or len(self.position[v.id]) != s:
                raise ValueError(f"position missing or malformed for {v.id}")
        for e in self.curve.edges:
            if e.id not in self.slope or len(self.slope[e.id]) != s:
                raise ValueError(f"slope missing or malformed for edge {e.id}")
        for l in self.curve.legs:
            if l.id not in self.slope or len(self.slope[l.id]) != s:
                raise ValueError(f"slope missing or malformed for leg {l.id}")
            if l.label not in self.contact or len(self.contact[l.label]) != s:
                raise ValueError(f"contact row missing or malformed for {l.label}")

    def total_degree(self) -> IntVec:
        out = [0] * self.target.num_factors
        for deg in self.multidegree.values():
            for i, d in enumerate(deg):
                out[i] += d
        return tuple(out)

    def circuit_degree(self) -> IntVec:
        circ = circuit_of(self.curve)
        out = [0] * self.target.num_factors
        for vid in circ.vertices:
            for i, d in enumerate(self.multidegree[vid]):
                out[i] += d
        return tuple(out)

    def germ_slopes_at(self, vid: str) -> list[tuple[str, IntVec]]:
        """Outgoing (id, slope) pairs at a vertex; self-loop germs cancel."""
        out: list[tuple[str, IntVec]] = []
        for e in self.curve.edges:
            if e.ends[0] == e.ends[1] == vid:
                continue
            if e.ends[0] == vid:
                out.append((e.id, self.slope[e.id]))
            elif e.ends[1] == vid:
                out.append((e.id, tuple(-x for x in self.slope[e.id])))
        for l in self.curve.legs:
            if l.vertex == vid:
                out.append((l.id, self.slope[l.id]))
        return out


@dataclass(frozen=True)
class Report:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# Consistency checks
# ---------------------------------------------------------------------------

def check_positions(m: TropicalMap, ch: Optional[Chamber] = None) -> Report:
    """Verify the map invariants as monoid-form identities.

    Checks position compatibility along every edge, leg slopes against
    their contact rows, and the divisor-degree constraint per divisor.
    """
    bad: list[str] = []
    for e in m.curve.edges:
        u, v = e.ends
        for k in range(m.target.num_divisors):
            s = m.slope[e.id][k]
            pu, pv = m.position[u][k], m.position[v][k]
            if s >= 0:
                lhs, rhs = pv, pu + e.length.scale(s)
            else:
                lhs, rhs = pu, pv + e.length.scale(-s)
            if lhs != rhs:
                bad.append(f"edge {e.id} coordinate {k}: position step is not "
                           f"slope*length ({lhs!r} vs {rhs!r})")
    for l in m.curve.legs:
        if m.slope[l.id] != m.contact[l.label]:
            bad.append(f"leg {l.id}: slope {m.slope[l.id]} differs from contact "
                       f"row of {l.label} {m.contact[l.label]}")
    total = m.total_degree()
    for j, (fi, _) in enumerate(m.target.divisors):
        col = sum(row[j] for row in m.contact.values())
        if col != total[fi]:
            bad.append(f"divisor {j}: contact column sums to {col}, expected "
                       f"factor degree {total[fi]}")
    return Report(not bad, tuple(bad))


def check_balancing(m: TropicalMap) -> Report:
    """Weighted germ slopes sum to zero in every factor's fan at every vertex.

    Requires the full toric boundary: each factor must carry all of its
    coordinate hyperplanes so the orthant coordinates span the fan.
    """
    if not m.target.is_full_toric():
        raise NotFullToricError("balancing requires full toric boundary")
    bad: list[str] = []
    for v in m.curve.vertices:
        germs = m.germ_slopes_at(v.id)
        for fi in range(m.target.num_factors):
            n = m.target.factors[fi]
            acc = [0] * n
            for j in m.target.divisor_indices_of_factor(fi):
                ray = m.target.fan_ray(fi, m.target.divisors[j][1])
                for _, slope in germs:
                    for k in range(n):
                        acc[k] += slope[j] * ray[k]
            if any(acc):
                bad.append(f"vertex {v.id} factor {fi}: residual slope sum {tuple(acc)}")
    return Report(not bad, tuple(bad))


# ---------------------------------------------------------------------------
# Subdivision, transversality, expansion
# ---------------------------------------------------------------------------

Breakpoints = tuple[tuple[MonoidForm, ...], ...]


def _is_boundary_value(f: MonoidForm, walls: Sequence[MonoidForm], ch: Chamber) -> bool:
    if f.is_zero():
        return True
    return any(form_sub_sign(f, w, ch) is Ordering.EQUAL for w in walls)


def _walls_strictly_between(lo: MonoidForm, hi: Optional[MonoidForm],
                            walls: Sequence[MonoidForm], ch: Chamber) -> list[MonoidForm]:
    """Walls w with lo < w (< hi); hi=None means the interval is unbounded."""
    out = []
    for w in walls:
        s_lo = form_sub_sign(w, lo, ch)
        if s_lo is Ordering.INCOMPARABLE:
            raise ChamberOrderError("refine chamber first")
        if s_lo is not Ordering.GREATER:
            continue
        if hi is not None:
            s_hi = form_sub_sign(w, hi, ch)
            if s_hi is Ordering.INCOMPARABLE:
                raise ChamberOrderError("refine chamber first")
            if s_hi is not Ordering.LESS:
                continue
        out.append(w)
    return out


def is_transverse(m: TropicalMap, subdivision: Breakpoints,
                  ch: Optional[Chamber] = None) -> bool:
    """Combinatorial transversality against a product subdivision.

    Every vertex coordinate must sit on a cell boundary (zero or a
    breakpoint) and every edge or leg image must cover exactly one cell in
    each coordinate where its slope is nonzero.
    """
    ch = ch if ch is not None else Chamber.top(m.curve.num_params)
    s = m.target.num_divisors
    if len(subdivision) != s:
        raise ValueError("one breakpoint list per divisor coordinate expected")
    for v in m.curve.vertices:
        for k in range(s):
            if not _is_boundary_value(m.position[v.id][k], subdivision[k], ch):
                return False
    for e in m.curve.edges:
        for k in range(s):
            if m.slope[e.id][k] == 0:
                continue
            a = m.position[e.ends[0]][k]
            b = m.position[e.ends[1]][k]
            if form_sub_sign(a, b, ch) is Ordering.GREATER:
                a, b = b, a
            if _walls_strictly_between(a, b, subdivision[k], ch):
                return False
    for l in m.curve.legs:
        for k in range(s):
            if m.slope[l.id][k] == 0:
                continue
            a = m.position[l.vertex][k]
            if _walls_strictly_between(a, None, subdivision[k], ch):
                return False
    return True


@dataclass(frozen=True)
class Expansion:
    target_subdivision: Breakpoints
    map: TropicalMap
    chamber: Chamber


def canonical_subdivision(m: TropicalMap) -> Breakpoints:
    """Breakpoints at every nonzero vertex image coordinate."""
    out = []
    for k in range(m.target.num_divisors):
        vals: list[MonoidForm] = []
        for v in m.curve.vertices:
            p = m.position[v.id][k]
            if p and p not in vals:
                vals.append(p)
        out.append(tuple(sorted(vals, key=lambda f: f.coeffs)))
    return tuple(out)


def _coordinate_form(base: MonoidForm, slope_k: int, t: MonoidForm,
                     cons: list[Constraint], fresh: list[int]) -> MonoidForm:
    """Position coordinate ``base + slope_k * t`` as a monoid form.

    Falls back to a fresh parameter pinned by an equality constraint when
    the value is not representable with nonnegative coefficients.
    """
    if slope_k >= 0:
        return base + t.scale(slope_k)
    val = base.try_sub(t.scale(-slope_k))
    if val is not None:
        return val
    p = MonoidForm.param(fresh[0])
    fresh[0] += 1
    cons.append(Constraint(p + t.scale(-slope_k), REL_EQ, base))
    return p


def expand(m: TropicalMap, subdivision: Breakpoints, ch: Chamber) -> Expansion:
    """Pull a target subdivision back to a source destabilization.

    Inserts a 2-valent genus-0 vertex wherever an edge or leg image
    crosses a wall; topology, legs, multidegree and contact orders are
    unchanged.  Fresh length parameters (with forcing identities added to
    the chamber) appear when a cut is not representable in the monoid.
    """
    s = m.target.num_divisors
    if len(subdivision) != s:
        raise ValueError("one breakpoint list per divisor coordinate expected")
    curve = m.curve
    position = dict(m.position)
    slope = dict(m.slope)
    multidegree = dict(m.multidegree)
    cons: list[Constraint] = []
    fresh = [ch.num_params]
    counter = 0

    def first_crossing(pu: tuple[MonoidForm, ...], sl: IntVec,
                       pv: Optional[tuple[MonoidForm, ...]]):
        """Some wall crossed strictly inside the image, with its source offset.

        Any interior crossing will do: the outer loop re-splits until none
        remain, and every split preserves the remaining crossings.  The
        offset t from the inner end solves position + slope*t = wall; it is
        None when not representable in the monoid (a fresh parameter is
        pinned to it by the caller).
        """
        for k in range(s):
            if sl[k] == 0:
                continue
            if pv is None and sl[k] < 0:
                continue  # a leg image must stay in the orthant
            a = pu[k]
            b = pv[k] if pv is not None else None
            lo, hi = (a, b) if sl[k] > 0 else (b, a)
            walls = _walls_strictly_between(lo, hi, subdivision[k], ch)
            if walls:
                w = walls[0]
                diff = w.try_sub(a) if sl[k] > 0 else a.try_sub(w)
                t = diff.scale(Fraction(1, abs(sl[k]))) if diff is not None else None
                if t is not None and t.is_zero():
                    t = None
                return (k, w, t)
        return None

    progress = True
    while progress:
        progress = False
        for e in sorted(curve.edges, key=lambda e: e.id):
            sl = slope[e.id]
            inner, outer = e.ends
            hit = first_crossing(position[inner], sl, position[outer])
            if hit is None:
                continue
            k, w, t = hit
            if t is None:
                t = MonoidForm.param(fresh[0])
                fresh[0] += 1
                if sl[k] > 0:
                    cons.append(Constraint(position[inner][k] + t.scale(sl[k]),
                                           REL_EQ, w))
                else:
                    cons.append(Constraint(w + t.scale(-sl[k]), REL_EQ,
                                           position[inner][k]))
            vid = f"x{counter}@{e.id}"
            counter += 1
            rest = e.length.try_sub(t)
            if rest is None or rest.is_zero():
                rest = MonoidForm.param(fresh[0])
                fresh[0] += 1
                cons.append(Constraint(t + rest, REL_EQ, e.length))
            newpos = tuple(
                w if kk == k else
                _coordinate_form(position[inner][kk], sl[kk], t, cons, fresh)
                for kk in range(s))
            curve = TropicalCurve(
                curve.vertices + (Vertex(vid, 0),),
                tuple(x for x in curve.edges if x.id != e.id)
                + (Edge(f"{e.id}.a", (inner, vid), t),
                   Edge(f"{e.id}.b", (vid, outer), rest)),
                curve.legs, max(curve.num_params, fresh[0]))
            position[vid] = newpos
            slope[f"{e.id}.a"] = sl
            slope[f"{e.id}.b"] = sl
            del slope[e.id]
            multidegree[vid] = tuple([0] * m.target.num_factors)
            progress = True
            break
        if progress:
            continue
        for l in sorted(curve.legs, key=lambda l: l.id):
            sl = slope[l.id]
            hit = first_crossing(position[l.vertex], sl, None)
            if hit is None:
                continue
            k, w, t = hit
            if t is None:
                t = MonoidForm.param(fresh[0])
                fresh[0] += 1
                cons.append(Constraint(position[l.vertex][k] + t.scale(sl[k]),
                                       REL_EQ, w))
            vid = f"x{counter}@{l.id}"
            counter += 1
            newpos = tuple(
                w if kk == k else
                _coordinate_form(position[l.vertex][kk], sl[kk], t, cons, fresh)
                for kk in range(s))
            curve = TropicalCurve(
                curve.vertices + (Vertex(vid, 0),),
                curve.edges + (Edge(f"cut.{l.id}", (l.vertex, vid), t),),
                tuple(Leg(l.id, vid, l.label) if x.id == l.id else x
                      for x in curve.legs),
                max(curve.num_params, fresh[0]))
            position[vid] = newpos
            slope[f"cut.{l.id}"] = sl
            multidegree[vid] = tuple([0] * m.target.num_factors)
            progress = True
            break

    new_ch = Chamber(ch.constraints + tuple(cons), fresh[0])
    curve = TropicalCurve(curve.vertices, curve.edges, curve.legs, fresh[0])
    refined = TropicalMap(curve, m.target, multidegree, position, slope, dict(m.contact))
    return Expansion(subdivision, refined, new_ch)


# ---------------------------------------------------------------------------
# Contraction radii of maps
# ---------------------------------------------------------------------------

def map_contraction_radius(m: TropicalMap, factor: Union[int, str],
                           ch: Chamber) -> Radius:
    """Smallest radial distance of a vertex not contracted by the projection.

    ``factor`` selects one projection, or ``"all"`` for the map itself
    (nonzero total multidegree).  Returns the infinite radius when every
    vertex is contracted.
    """
    dist = radial_distances(m.curve)

    def degree_positive(vid: str) -> bool:
        deg = m.multidegree[vid]
        if factor == ALL_FACTORS:
            return any(deg)
        return deg[factor] > 0

    candidates = [dist[v.id] for v in m.curve.vertices if degree_positive(v.id)]
    if not candidates:
        return Radius.infinite()
    best = candidates[0]
    for d in candidates[1:]:
        s = form_sub_sign(d, best, ch)
        if s is Ordering.INCOMPARABLE:
            raise ChamberOrderError("curve is not radially aligned in this chamber")
        if s is Ordering.LESS:
            best = d
    return Radius.exact(best)


# ---------------------------------------------------------------------------
# Divisor completion
# ---------------------------------------------------------------------------

_MARK_RE = re.compile(r"^q(\d+)$")


def _fresh_marking_labels(m: TropicalMap, count: int) -> list[str]:
    top = 0
    for label in m.contact:
        match = _MARK_RE.match(label)
        if match:
            top = max(top, int(match.group(1)))
    return [f"q{top + i + 1}" for i in range(count)]


def complete_divisor(m: TropicalMap, factor: int) -> TropicalMap:
    """Add one missing coordinate divisor of the factor, lifting the map.

    A generic new divisor meets each non-contracted component transversally,
    so every vertex gains (its factor degree)-many unit-contact legs in the
    new coordinate; existing positions, slopes and contact rows extend by
    zero.
    """
    missing = m.target.missing_coordinates(factor)
    if not missing:
        raise BoundaryFullError("boundary already full")
    coord = missing[0]
    target = TargetModel(m.target.factors, m.target.divisors + ((factor, coord),))

    position = {v: pos + (MonoidForm.zero(),) for v, pos in m.position.items()}
    slope = {k: s + (0,) for k, s in m.slope.items()}
    contact = {label: row + (0,) for label, row in m.contact.items()}

    total_new = sum(deg[factor] for deg in m.multidegree.values())
    labels = _fresh_marking_labels(m, total_new)
    new_legs: list[Leg] = []
    j = target.num_divisors - 1
    unit = tuple(1 if k == j else 0 for k in range(target.num_divisors))
    it = iter(labels)
    for v in m.curve.vertices:
        for _ in range(m.multidegree[v.id][factor]):
            label = next(it)
            leg = Leg(f"leg_{label}", v.id, label)
            new_legs.append(leg)
            slope[leg.id] = unit
            contact[label] = unit

    curve = TropicalCurve(m.curve.vertices, m.curve.edges,
                          m.curve.legs + tuple(new_legs), m.curve.num_params)
    return TropicalMap(curve, target, dict(m.multidegree), position, slope, contact)


def complete_to_toric(m: TropicalMap) -> TropicalMap:
    """Complete every factor to its full toric boundary."""
    out = m
    for fi in range(m.target.num_factors):
        while out.target.missing_coordinates(fi):
            out = complete_divisor(out, fi)
    return out


def forget_divisor(m: TropicalMap, divisor_index: int) -> TropicalMap:
    """Drop a divisor coordinate together with its fictitious markings.

    Every marking meeting the divisor must meet it transversally and meet
    nothing else; those markings and their legs are removed, inverting
    ``complete_divisor``.
    """
    j = divisor_index
    if not (0 <= j < m.target.num_divisors):
        raise ValueError(f"unknown divisor index {j}")
    doomed = set()
    for label, row in m.contact.items():
        if row[j] != 0:
            if row[j] != 1 or any(row[k] != 0 for k in range(len(row)) if k != j):
                raise ValueError("markings/divisor not fictitious")
            doomed.add(label)
    for v, pos in m.position.items():
        if pos[j]:
            raise ValueError(f"vertex {v} sits inside the divisor; cannot forget")

    def drop(vec):
        return tuple(x for k, x in enumerate(vec) if k != j)

    legs = tuple(l for l in m.curve.legs if l.label not in doomed)
    curve = TropicalCurve(m.curve.vertices, m.curve.edges, legs, m.curve.num_params)
    target = TargetModel(m.target.factors, drop(m.target.divisors))
    position = {v: drop(pos) for v, pos in m.position.items()}
    slope = {k: drop(s) for k, s in m.slope.items()
             if k in {e.id for e in curve.edges} | {l.id for l in curve.legs}}
    contact = {label: drop(row) for label, row in m.contact.items()
               if label not in doomed}
    return TropicalMap(curve, target, dict(m.multidegree), position, slope, contact)
