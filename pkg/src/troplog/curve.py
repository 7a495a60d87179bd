"""Genus-1 tropical curves: circuit, radial distance, alignment, contraction.

A tropical curve is a connected finite graph with genus-weighted vertices,
edges of symbolic positive length (monoid forms) and labeled legs.  For
total genus one there is a distinguished *circuit* (a genus-1 vertex, or
the unique cycle), a radial distance function from it, and a contraction
procedure producing elliptic Gorenstein singularity data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .forms import (
    Chamber,
    Constraint,
    EmptyChamberError,
    MonoidForm,
    Ordering,
    REL_EQ,
    REL_LT,
    chamber_feasible,
    chamber_refinements,
    form_diff,
    form_sub_sign,
)


class NotGenusOneError(ValueError):
    pass


class NoAdmissibleRadiusError(ValueError):
    pass


class ChamberOrderError(ValueError):
    """A required comparison is not decided by the chamber."""


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Vertex:
    id: str
    genus: int = 0


@dataclass(frozen=True)
class Edge:
    id: str
    ends: tuple[str, str]
    length: MonoidForm

    def other(self, v: str) -> str:
        a, b = self.ends
        return b if v == a else a


@dataclass(frozen=True)
class Leg:
    id: str
    vertex: str
    label: str


@dataclass(frozen=True)
class TropicalCurve:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    legs: tuple[Leg, ...] = ()
    num_params: int = 0

    def __post_init__(self):
        ids = [v.id for v in self.vertices]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate vertex ids")
        vs = set(ids)
        for e in self.edges:
            if e.ends[0] not in vs or e.ends[1] not in vs:
                raise ValueError(f"edge {e.id} has unknown endpoint")
            if e.length.is_zero():
                raise ValueError(f"edge {e.id} has zero length")
        for l in self.legs:
            if l.vertex not in vs:
                raise ValueError(f"leg {l.id} attached to unknown vertex")
        if not self._connected():
            raise ValueError("underlying graph is not connected")

    def _connected(self) -> bool:
        if not self.vertices:
            return False
        adj: dict[str, list[str]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            adj[e.ends[0]].append(e.ends[1])
            adj[e.ends[1]].append(e.ends[0])
        seen = {self.vertices[0].id}
        stack = [self.vertices[0].id]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    # -- basic accessors ----------------------------------------------------

    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise ValueError(f"unknown vertex {vid!r}")

    def edges_at(self, vid: str) -> list[Edge]:
        return [e for e in self.edges if vid in e.ends]

    def legs_at(self, vid: str) -> list[Leg]:
        return [l for l in self.legs if l.vertex == vid]

    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def total_genus(self) -> int:
        return self.betti() + sum(v.genus for v in self.vertices)

    def valence(self, vid: str) -> int:
        """Edge germs plus legs at the vertex (a self-loop counts twice)."""
        n = sum(1 for e in self.edges for end in e.ends if end == vid)
        return n + len(self.legs_at(vid))

    def marking_labels(self) -> tuple[str, ...]:
        return tuple(l.label for l in self.legs)


@dataclass(frozen=True)
class Circuit:
    vertices: frozenset[str]
    edges: frozenset[str]


# ---------------------------------------------------------------------------
# Circuit and radial distance
# ---------------------------------------------------------------------------

def circuit_of(c: TropicalCurve) -> Circuit:
    """The minimal genus-1 subcurve: a genus-1 vertex, or the unique cycle."""
    if c.total_genus() != 1:
        raise NotGenusOneError("not genus one")
    if c.betti() == 0:
        v = next(v for v in c.vertices if v.genus == 1)
        return Circuit(frozenset({v.id}), frozenset())
    # Betti number one: prune leaves until only the cycle remains.
    alive_v = {v.id for v in c.vertices}
    alive_e = {e.id: e for e in c.edges}
    changed = True
    while changed:
        changed = False
        for vid in list(alive_v):
            incident = [e for e in alive_e.values() if vid in e.ends]
            if len(incident) == 1 and incident[0].ends[0] != incident[0].ends[1]:
                alive_v.discard(vid)
                del alive_e[incident[0].id]
                changed = True
    return Circuit(frozenset(alive_v), frozenset(alive_e))


def radial_distances(c: TropicalCurve) -> dict[str, MonoidForm]:
    """lambda(v) for every vertex: sum of edge lengths on the path to the circuit."""
    circ = circuit_of(c)
    dist: dict[str, MonoidForm] = {v: MonoidForm.zero() for v in circ.vertices}
    frontier = list(circ.vertices)
    while frontier:
        nxt = []
        for vid in frontier:
            for e in c.edges_at(vid):
                w = e.other(vid)
                if w not in dist:
                    dist[w] = dist[vid] + e.length
                    nxt.append(w)
        frontier = nxt
    return dist


def lambda_of(c: TropicalCurve, vid: str) -> MonoidForm:
    if all(v.id != vid for v in c.vertices):
        raise ValueError(f"unknown vertex {vid!r}")
    return radial_distances(c)[vid]


def alignment_chambers(c: TropicalCurve, base: Optional[Chamber] = None) -> list[Chamber]:
    """Chambers on which all radial distances are totally preordered.

    The curve is radially aligned over a chamber iff the chamber refines
    one of the returned chambers.
    """
    dist = radial_distances(c)
    forms = sorted(set(dist.values()), key=lambda f: f.coeffs)
    ch = base if base is not None else Chamber.top(c.num_params)
    return chamber_refinements(forms, ch)


def is_aligned(c: TropicalCurve, ch: Chamber) -> bool:
    dist = list(radial_distances(c).values())
    for a, b in itertools.combinations(dist, 2):
        if form_sub_sign(a, b, ch) is Ordering.INCOMPARABLE:
            return False
    return True


# ---------------------------------------------------------------------------
# Radii and circle valences
# ---------------------------------------------------------------------------

OFFSET_EXACT = "exact"
OFFSET_JUST_AFTER = "just-after"
OFFSET_INFINITE = "infinite"


@dataclass(frozen=True)
class Radius:
    """A distance from the circuit, possibly shifted by a symbolic epsilon.

    ``just-after`` radii sit strictly between a vertex distance and the
    next one; they are ordered lexicographically in ``(base, epsilon)``.
    The ``infinite`` radius exceeds every distance (sentinel for totally
    contracted maps).
    """

    base: Optional[MonoidForm]
    offset: str = OFFSET_EXACT

    def __post_init__(self):
        if self.offset not in (OFFSET_EXACT, OFFSET_JUST_AFTER, OFFSET_INFINITE):
            raise ValueError(f"bad offset {self.offset!r}")
        if (self.base is None) != (self.offset == OFFSET_INFINITE):
            raise ValueError("exactly the infinite radius has no base form")

    @staticmethod
    def exact(base: MonoidForm) -> "Radius":
        return Radius(base, OFFSET_EXACT)

    @staticmethod
    def just_after(base: MonoidForm) -> "Radius":
        return Radius(base, OFFSET_JUST_AFTER)

    @staticmethod
    def infinite() -> "Radius":
        return Radius(None, OFFSET_INFINITE)

    def is_infinite(self) -> bool:
        return self.offset == OFFSET_INFINITE

    def compare_distance(self, d: MonoidForm, ch: Chamber) -> Ordering:
        """Order of this radius against a vertex distance, in chamber order."""
        if self.is_infinite():
            return Ordering.GREATER
        s = form_sub_sign(self.base, d, ch)
        if s is Ordering.INCOMPARABLE:
            raise ChamberOrderError(f"radius base {self.base!r} incomparable with {d!r}")
        if self.offset == OFFSET_EXACT:
            return s
        # just-after: strictly above its base, below every larger distance
        return Ordering.GREATER if s in (Ordering.EQUAL, Ordering.GREATER) else Ordering.LESS

    def __repr__(self) -> str:
        if self.is_infinite():
            return "Radius(+inf)"
        eps = "" if self.offset == OFFSET_EXACT else "+eps"
        return f"Radius({self.base!r}{eps})"


def circle_valences(c: TropicalCurve, r: Radius, ch: Chamber) -> tuple[int, int]:
    """(inner, outer) germ counts of the circle at radius ``r``.

    Circle points are vertices at distance exactly ``r`` plus interior
    points of edges and legs straddling ``r`` (legs are metric rays, so a
    leg based strictly inside is crossed once).  Inner germs point toward
    the circuit, outer germs away; legs based at a circle vertex count as
    outer germs.  Constant-distance edges (the circuit cycle) contribute
    nothing.
    """
    dist = radial_distances(c)
    inner = outer = 0
    for v in c.vertices:
        if r.compare_distance(dist[v.id], ch) is not Ordering.EQUAL:
            continue
        for e in c.edges_at(v.id):
            if e.ends[0] == e.ends[1]:
                continue
            s = form_sub_sign(dist[e.other(v.id)], dist[v.id], ch)
            if s is Ordering.LESS:
                inner += 1
            elif s is Ordering.GREATER:
                outer += 1
        outer += len(c.legs_at(v.id))
    for e in c.edges:
        a, b = dist[e.ends[0]], dist[e.ends[1]]
        if form_sub_sign(a, b, ch) is Ordering.GREATER:
            a, b = b, a
        if (r.compare_distance(a, ch) is Ordering.GREATER
                and r.compare_distance(b, ch) is Ordering.LESS):
            inner += 1
            outer += 1
    for l in c.legs:
        if r.compare_distance(dist[l.vertex], ch) is Ordering.GREATER:
            inner += 1
            outer += 1
    return inner, outer


def _distinct_sorted_distances(c: TropicalCurve, ch: Chamber) -> list[MonoidForm]:
    dist = radial_distances(c)
    distinct: list[MonoidForm] = []
    for d in sorted(set(dist.values()), key=lambda f: f.coeffs):
        if not any(form_sub_sign(d, seen, ch) is Ordering.EQUAL for seen in distinct):
            distinct.append(d)
    order: list[MonoidForm] = []
    for d in distinct:
        pos = 0
        for i, seen in enumerate(order):
            s = form_sub_sign(d, seen, ch)
            if s is Ordering.INCOMPARABLE:
                raise ChamberOrderError("chamber does not totally order vertex distances")
            if s is Ordering.GREATER:
                pos = i + 1
        order.insert(pos, d)
    return order


def candidate_radii(c: TropicalCurve, ch: Chamber) -> list[Radius]:
    """Vertex distances plus just-after shifts between consecutive ones."""
    levels = _distinct_sorted_distances(c, ch)
    out: list[Radius] = []
    for i, d in enumerate(levels):
        out.append(Radius.exact(d))
        if i + 1 < len(levels):
            out.append(Radius.just_after(d))
    return out


def contraction_radius_for_m(c: TropicalCurve, m: int, ch: Chamber) -> Radius:
    """The contraction radius whose circle has inner valence <= m <= outer valence.

    Both valences grow with the radius, so the admissible candidates form
    a window; the radius of the contraction is the top of that window,
    the last candidate before the circle becomes too crowded from inside.
    """
    if c.total_genus() != 1:
        raise NotGenusOneError("not genus one")
    if m < 1 or m > len(c.legs):
        raise ValueError(f"m must be between 1 and the number of legs, got {m}")
    best: Optional[Radius] = None
    for r in candidate_radii(c, ch):
        inner, outer = circle_valences(c, r, ch)
        if inner <= m <= outer:
            best = r
    if best is None:
        raise NoAdmissibleRadiusError("no admissible radius")
    return best


# ---------------------------------------------------------------------------
# Destabilization and contraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Destabilization:
    curve: TropicalCurve
    chamber: Chamber
    new_vertices: tuple[str, ...] = ()


def destabilize_at(c: TropicalCurve, r: Radius, ch: Chamber) -> Destabilization:
    """Split every edge straddling radius ``r`` at distance exactly ``r``.

    The new 2-valent genus-0 vertices sit at distance ``r``; when the
    splitting lengths are not representable in the monoid, fresh length
    parameters are introduced and the chamber is extended with the forced
    identities (and, at a just-after radius, the forced strict bounds).
    """
    if r.is_infinite():
        raise ValueError("cannot destabilize at the infinite radius")
    dist = radial_distances(c)
    straddled = []
    for e in c.edges:
        a, b = dist[e.ends[0]], dist[e.ends[1]]
        inner_end, outer_end = e.ends
        if form_sub_sign(a, b, ch) is Ordering.GREATER:
            a, b = b, a
            inner_end, outer_end = outer_end, inner_end
        if (r.compare_distance(a, ch) is Ordering.GREATER
                and r.compare_distance(b, ch) is Ordering.LESS):
            straddled.append((e, inner_end, outer_end, a))
    if not straddled:
        return Destabilization(c, ch)

    split_ids = {e.id for e, *_ in straddled}
    vertices = list(c.vertices)
    edges = [e for e in c.edges if e.id not in split_ids]
    extra_cons: list[Constraint] = []
    next_param = ch.num_params
    new_ids: list[str] = []
    new_positions: list[MonoidForm] = []  # realized distance of each new vertex
    levels = _distinct_sorted_distances(c, ch)

    for e, inner_end, outer_end, lam_in in straddled:
        vid = f"{e.id}@cut"
        new_ids.append(vid)
        vertices.append(Vertex(vid, 0))
        if r.offset == OFFSET_EXACT:
            lo = r.base.try_sub(lam_in)
            if lo is None or lo.is_zero():
                lo = MonoidForm.param(next_param)
                next_param += 1
                extra_cons.append(Constraint(lam_in + lo, REL_EQ, r.base))
        else:
            # just-after: pin the cut strictly between base and the next level
            lo = MonoidForm.param(next_param)
            next_param += 1
            extra_cons.append(Constraint(r.base, REL_LT, lam_in + lo))
            for d in levels:
                if form_sub_sign(d, r.base, ch) is Ordering.GREATER:
                    extra_cons.append(Constraint(lam_in + lo, REL_LT, d))
        hi = e.length.try_sub(lo)
        if hi is None or hi.is_zero():
            hi = MonoidForm.param(next_param)
            next_param += 1
            extra_cons.append(Constraint(lo + hi, REL_EQ, e.length))
        new_positions.append(lam_in + lo)
        edges.append(Edge(f"{e.id}.in", (inner_end, vid), lo))
        edges.append(Edge(f"{e.id}.out", (vid, outer_end), hi))

    # all cuts lie on one circle, hence at equal distance
    for p, q in zip(new_positions, new_positions[1:]):
        if form_diff(p, q):
            extra_cons.append(Constraint(p, REL_EQ, q))

    new_ch = Chamber(ch.constraints + tuple(extra_cons), next_param)
    if not chamber_feasible(new_ch):
        raise EmptyChamberError("destabilization produced an empty chamber")
    curve = TropicalCurve(tuple(vertices), tuple(edges), c.legs, next_param)
    return Destabilization(curve, new_ch, tuple(new_ids))


KIND_SMOOTH = "smooth-elliptic"
KIND_CUSP = "cusp"
KIND_TACNODE = "tacnode"
KIND_M_LINES = "m-lines"


@dataclass(frozen=True)
class SingularityDescriptor:
    """Branch count and Smyth type of an elliptic Gorenstein singularity.

    For each m >= 1 there is one type with m branches: an ordinary cusp,
    an ordinary tacnode, or m general concurrent lines.
    """

    branches: int
    kind: str
    local_ring: str

    @staticmethod
    def for_branches(m: int) -> "SingularityDescriptor":
        if m < 0:
            raise ValueError("branch count must be nonnegative")
        if m == 0:
            return SingularityDescriptor(0, KIND_SMOOTH, "k[[x]]")
        if m == 1:
            return SingularityDescriptor(1, KIND_CUSP, "k[[x,y]]/(y^2-x^3)")
        if m == 2:
            return SingularityDescriptor(2, KIND_TACNODE, "k[[x,y]]/(y^2-x^2y)")
        return SingularityDescriptor(
            m, KIND_M_LINES, f"k[[x_1,...,x_{m - 1}]]/I_{m}")


@dataclass(frozen=True)
class Contraction:
    curve: TropicalCurve
    descriptor: SingularityDescriptor
    chamber: Chamber
    core_id: str = "core"


def contract_circle(c: TropicalCurve, r: Radius, ch: Chamber) -> Contraction:
    """Merge everything within radius ``r`` into a single genus-1 vertex.

    The curve is destabilized at ``r`` first, so the merged set is bounded
    by 2-valent vertices sitting exactly on the circle.  The descriptor
    branch count is the number of outward germs at radius ``r`` (edges
    leaving the merged set plus legs carried by it), which bounds the
    elliptic singularity obtained by contracting in a smoothing family.
    """
    destab = destabilize_at(c, r, ch)
    cur, cch = destab.curve, destab.chamber
    dist = radial_distances(cur)
    merged = {vid for vid, d in dist.items()
              if r.compare_distance(d, cch) in (Ordering.GREATER, Ordering.EQUAL)}
    core = "core"
    outside = {v.id for v in cur.vertices} - merged
    while core in outside:
        core += "_"
    vertices = [Vertex(core, 1)] + [v for v in cur.vertices if v.id not in merged]
    edges = []
    for e in cur.edges:
        a_in, b_in = e.ends[0] in merged, e.ends[1] in merged
        if a_in and b_in:
            continue
        if a_in or b_in:
            ends = (core if a_in else e.ends[0], core if b_in else e.ends[1])
            edges.append(Edge(e.id, ends, e.length))
        else:
            edges.append(e)
    legs = tuple(Leg(l.id, core if l.vertex in merged else l.vertex, l.label)
                 for l in cur.legs)
    branch_count = (sum(1 for e in edges if core in e.ends)
                    + sum(1 for l in legs if l.vertex == core))
    curve = TropicalCurve(tuple(vertices), tuple(edges), legs, cur.num_params)
    return Contraction(curve, SingularityDescriptor.for_branches(branch_count),
                       cch, core)
