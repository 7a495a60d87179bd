"""Tropical well-spacedness verdicts and bounded stratum enumeration.

A map contracting its circuit into a codimension-r boundary stratum is
well spaced when, for every integer covector on the r-dimensional normal
block, the minimum distance from the circuit to the flags with nonzero
covector slope is attained enough times (three, by default).  The
universally quantified condition is decided exactly: the verdict only
depends on which slopes the covector annihilates, so it suffices to scan
the flats of the arrangement spanned by the incident slopes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .curve import (
    ChamberOrderError,
    Edge,
    Leg,
    TropicalCurve,
    Vertex,
    alignment_chambers,
    circuit_of,
    radial_distances,
)
from .forms import Chamber, MonoidForm, Ordering, form_sub_sign
from .tropmap import TargetModel, TropicalMap


class CircuitNotContractedError(ValueError):
    pass


class SearchSpaceError(ValueError):
    pass


REASON_POSITIVE_DEGREE = "circuit-positive-degree"
REASON_TORIC_PASSED = "toric-condition-passed"
REASON_TORIC_FAILED = "toric-condition-failed"


@dataclass(frozen=True)
class WSVerdict:
    well_spaced: bool
    reason: str
    covector: Optional[tuple[int, ...]] = None
    distances: tuple[MonoidForm, ...] = ()


# ---------------------------------------------------------------------------
# Exact linear algebra on integer vectors
# ---------------------------------------------------------------------------

def _rref(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    rows = [list(r) for r in rows]
    out: list[list[Fraction]] = []
    cols = len(rows[0]) if rows else 0
    lead = 0
    for col in range(cols):
        pivot = next((r for r in rows if r[col] != 0), None)
        if pivot is None:
            continue
        rows.remove(pivot)
        pivot = [x / pivot[col] for x in pivot]
        rows = [[x - r[col] * p for x, p in zip(r, pivot)] for r in rows]
        out = [[x - r[col] * p for x, p in zip(r, pivot)] for r in out]
        out.append(pivot)
        lead += 1
    return out


def _in_span(vec: Sequence[int], basis: list[list[Fraction]]) -> bool:
    residue = [Fraction(x) for x in vec]
    for row in basis:
        col = next(i for i, x in enumerate(row) if x != 0)
        if residue[col] != 0:
            factor = residue[col] / row[col]
            residue = [x - factor * y for x, y in zip(residue, row)]
    return all(x == 0 for x in residue)


def _nullspace_int(rows: list[Sequence[int]], dim: int) -> list[tuple[int, ...]]:
    """Integer basis of {x : row . x = 0 for all rows}."""
    rref = _rref([[Fraction(x) for x in r] for r in rows]) if rows else []
    pivots = [next(i for i, x in enumerate(r) if x != 0) for r in rref]
    free = [i for i in range(dim) if i not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * dim
        vec[f] = Fraction(1)
        for r, p in zip(rref, pivots):
            vec[p] = -r[f]
        den = math.lcm(*(x.denominator for x in vec))
        ivec = [int(x * den) for x in vec]
        g = math.gcd(*(abs(v) for v in ivec))
        basis.append(tuple(v // (g or 1) for v in ivec))
    return basis


def _normalize_sign(vec: Sequence[int]) -> tuple[int, ...]:
    for x in vec:
        if x != 0:
            return tuple(vec) if x > 0 else tuple(-y for y in vec)
    return tuple(vec)


def _witness_covector(span_vecs: list[tuple[int, ...]],
                      avoid: list[tuple[int, ...]], dim: int) -> tuple[int, ...]:
    """An integer covector orthogonal to ``span_vecs`` but to nothing in ``avoid``."""
    null = _nullspace_int(list(span_vecs), dim)
    if not null:
        raise ValueError("no covector orthogonal to a full-dimensional span")
    for radius in range(1, 8):
        for combo in itertools.product(range(-radius, radius + 1), repeat=len(null)):
            if not any(combo):
                continue
            chi = tuple(sum(c * b[k] for c, b in zip(combo, null))
                        for k in range(dim))
            if all(sum(c * s for c, s in zip(chi, v)) != 0 for v in avoid):
                g = math.gcd(*(abs(x) for x in chi))
                return _normalize_sign(tuple(x // (g or 1) for x in chi))
    raise RuntimeError("witness covector search exhausted")  # pragma: no cover


# ---------------------------------------------------------------------------
# The toric well-spacedness condition
# ---------------------------------------------------------------------------

def _block_slope(vec: Sequence[int], block: Sequence[int]) -> tuple[int, ...]:
    return tuple(vec[j] for j in block)


def _flat_verdict(m: TropicalMap, ch: Chamber, block: Sequence[int],
                  span_basis: list[list[Fraction]], threshold: int):
    """Flags and minimum multiplicity for one flat of the slope arrangement.

    Returns (ok, flag distances) where a flag is a germ leaving the
    maximal connected subgraph through the circuit on which every crossed
    germ slope lies in the flat's span.
    """
    circ = circuit_of(m.curve)
    dist = radial_distances(m.curve)

    def crossable(slope: tuple[int, ...]) -> bool:
        s = _block_slope(slope, block)
        return not any(s) or _in_span(s, span_basis)

    component = set(circ.vertices)
    frontier = list(circ.vertices)
    while frontier:
        vid = frontier.pop()
        for e in m.curve.edges_at(vid):
            w = e.other(vid)
            if w not in component and crossable(m.slope[e.id]):
                component.add(w)
                frontier.append(w)

    flags: list[MonoidForm] = []
    for vid in component:
        for e in m.curve.edges_at(vid):
            if e.other(vid) in component and e.ends[0] != e.ends[1]:
                continue
            if not crossable(m.slope[e.id]):
                flags.append(dist[vid])
        for l in m.curve.legs_at(vid):
            if not crossable(m.contact[l.label]):
                flags.append(dist[vid])
    if not flags:
        return True, ()

    minimum = flags[0]
    for d in flags[1:]:
        s = form_sub_sign(d, minimum, ch)
        if s is Ordering.INCOMPARABLE:
            raise ChamberOrderError("flag distances are not comparable; refine chamber")
        if s is Ordering.LESS:
            minimum = d
    multiplicity = sum(1 for d in flags
                       if form_sub_sign(d, minimum, ch) is Ordering.EQUAL)
    return multiplicity >= threshold, tuple(flags)


def toric_wellspaced(m: TropicalMap, ch: Chamber,
                     block: Optional[Sequence[int]] = None,
                     threshold: int = 3) -> WSVerdict:
    """Decide the covector condition on the selected divisor-coordinate block.

    For every test covector the minimum of the circuit distances of the
    flags with nonzero covector slope must occur at least ``threshold``
    times.  Scanning one representative per flat of the incident slope
    arrangement is exhaustive, because the flag set only depends on which
    slopes the covector kills.
    """
    block = tuple(range(m.target.num_divisors)) if block is None else tuple(block)
    r = len(block)
    if r == 0:
        return WSVerdict(True, REASON_TORIC_PASSED)
    circ = circuit_of(m.curve)
    for eid in circ.edges:
        if any(_block_slope(m.slope[eid], block)):
            raise CircuitNotContractedError(
                "circuit is not contracted in the selected block")

    slopes: set[tuple[int, ...]] = set()
    for e in m.curve.edges:
        s = _normalize_sign(_block_slope(m.slope[e.id], block))
        if any(s):
            slopes.add(s)
    for l in m.curve.legs:
        s = _normalize_sign(_block_slope(m.contact[l.label], block))
        if any(s):
            slopes.add(s)
    slope_list = sorted(slopes)

    flats: dict[frozenset, list[tuple[int, ...]]] = {}
    for size in range(0, r):
        for subset in itertools.combinations(slope_list, size):
            basis = _rref([[Fraction(x) for x in v] for v in subset])
            zset = frozenset(s for s in slope_list if _in_span(s, basis))
            flats.setdefault(zset, list(subset))

    for zset, subset in sorted(flats.items(), key=lambda kv: sorted(kv[0])):
        basis = _rref([[Fraction(x) for x in v] for v in subset]) if subset else []
        ok, distances = _flat_verdict(m, ch, block, basis, threshold)
        if not ok:
            chi = _witness_covector(list(zset), [s for s in slope_list if s not in zset], r)
            return WSVerdict(False, REASON_TORIC_FAILED, covector=chi,
                             distances=distances)
    return WSVerdict(True, REASON_TORIC_PASSED)


def is_wellspaced(m: TropicalMap, ch: Chamber, threshold: int = 3) -> WSVerdict:
    """Well-spacedness of a radially aligned, transverse map.

    Automatic when the circuit has nonzero multidegree; otherwise the
    covector condition is evaluated on the block of divisor coordinates
    whose wall the contracted circuit sits strictly inside.
    """
    if any(m.circuit_degree()):
        return WSVerdict(True, REASON_POSITIVE_DEGREE)
    circ = circuit_of(m.curve)
    block = []
    for j in range(m.target.num_divisors):
        if all(m.position[v][j] for v in circ.vertices) and \
                all(m.slope[e][j] == 0 for e in circ.edges):
            block.append(j)
    return toric_wellspaced(m, ch, block, threshold)


# ---------------------------------------------------------------------------
# Stratum enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StratumType:
    """One cone of the tropical moduli at a fixed combinatorial type."""

    genus: tuple[int, ...]
    degrees: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]
    markings: tuple[int, ...]
    chamber: Chamber
    curve: TropicalCurve
    map: TropicalMap
    aligned: bool
    transverse: bool
    well_spaced: bool
    ws_reason: str

    def key(self):
        return (len(self.genus), self.genus, self.degrees, self.edges,
                self.markings, tuple(repr(c) for c in self.chamber.constraints))


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def _connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    seen = {0}
    stack = [0]
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def _canonical_key(n, genus, degrees, edges, markings):
    best = None
    for perm in itertools.permutations(range(n)):
        g = tuple(genus[perm.index(i)] for i in range(n))
        d = tuple(degrees[perm.index(i)] for i in range(n))
        e = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges))
        mk = tuple(perm[v] for v in markings)
        cand = (g, d, e, mk)
        if best is None or cand < best:
            best = cand
    return best


def _multisets(pairs: int, size: int) -> int:
    if size == 0:
        return 1
    if pairs == 0:
        return 0
    return math.comb(pairs + size - 1, size)


def _search_budget(degree: tuple[int, ...], n: int, max_vertices: int) -> int:
    total = 0
    for nv in range(1, max_vertices + 1):
        pairs = nv * (nv - 1) // 2
        graphs = _multisets(pairs, nv - 1) + _multisets(pairs, nv)
        splits = math.prod(math.comb(d + nv - 1, nv - 1) for d in degree)
        total += max(graphs, 1) * (nv + 1) * splits * nv ** n
    return total


def enumerate_strata(target: TargetModel, n: int, degree: tuple[int, ...],
                     max_vertices: int, threshold: int = 3,
                     max_search: int = 200_000) -> list[StratumType]:
    """All genus-1 stratum types with bounded vertex count, up to isomorphism.

    Vertices carry genus and multidegree, markings are labeled, and every
    skeleton is expanded into its radial alignment chambers with the
    aligned/transverse/well-spaced flags computed per chamber.  Output is
    canonically sorted and deterministic.
    """
    if target.num_divisors:
        raise ValueError("stratum enumeration expects an empty divisor set")
    if len(degree) != target.num_factors:
        raise ValueError("one degree per factor expected")
    if _search_budget(degree, n, max_vertices) > max_search:
        raise SearchSpaceError("search space too large")

    found: dict[tuple, tuple] = {}
    for nv in range(1, max_vertices + 1):
        pairs = list(itertools.combinations(range(nv), 2))
        for ne in (nv - 1, nv):
            if ne < 0 or (ne == 0 and nv > 1):
                continue
            for edges in itertools.combinations_with_replacement(pairs, ne) \
                    if pairs else ([()] if ne == 0 else []):
                edges = tuple(edges)
                if not _connected(nv, edges):
                    continue
                betti = ne - nv + 1
                genus_options = ([tuple(1 if i == j else 0 for i in range(nv))
                                  for j in range(nv)] if betti == 0
                                 else [tuple([0] * nv)])
                for genus in genus_options:
                    for split in itertools.product(
                            *[_compositions(d, nv) for d in degree]):
                        degrees = tuple(tuple(split[f][v] for f in range(len(degree)))
                                        for v in range(nv))
                        for markings in itertools.product(range(nv), repeat=n):
                            if not _stable(nv, genus, degrees, edges, markings):
                                continue
                            key = _canonical_key(nv, genus, degrees, edges, markings)
                            found.setdefault(key, (nv, genus, degrees, edges, markings))

    out: list[StratumType] = []
    for key in sorted(found, key=lambda k: (len(k[0]), k)):
        nv, genus, degrees, edges, markings = found[key]
        curve = TropicalCurve(
            tuple(Vertex(f"v{i}", genus[i]) for i in range(nv)),
            tuple(Edge(f"e{i}", (f"v{a}", f"v{b}"), MonoidForm.param(i))
                  for i, (a, b) in enumerate(edges)),
            tuple(Leg(f"l{i + 1}", f"v{markings[i]}", f"m{i + 1}")
                  for i in range(n)),
            num_params=len(edges),
        )
        mp = TropicalMap(
            curve, target,
            {f"v{i}": degrees[i] for i in range(nv)},
            {f"v{i}": () for i in range(nv)},
            {e.id: () for e in curve.edges} | {l.id: () for l in curve.legs},
            {f"m{i + 1}": () for i in range(n)},
        )
        for ch in alignment_chambers(curve):
            verdict = is_wellspaced(mp, ch, threshold)
            out.append(StratumType(genus, degrees, edges, markings, ch,
                                   curve, mp, aligned=True, transverse=True,
                                   well_spaced=verdict.well_spaced,
                                   ws_reason=verdict.reason))
    return out


def _stable(nv, genus, degrees, edges, markings) -> bool:
    for v in range(nv):
        valence = sum(1 for a, b in edges for x in (a, b) if x == v)
        valence += sum(1 for mv in markings if mv == v)
        if genus[v] == 0 and not any(degrees[v]) and valence < 3:
            return False
        if genus[v] == 1 and not any(degrees[v]) and valence < 1:
            return False
    return True
