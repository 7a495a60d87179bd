"""Exact arithmetic for generalized edge lengths and ordering chambers.

Lengths, distances and radii are nonnegative rational linear forms in a
finite set of base parameters ("the edge-length monoid").  Whether one
form is larger than another is in general undecidable pointwise; it only
becomes decidable over a *chamber*, a rational polyhedral cone of
parameter values cut out by order constraints.  All decisions here are
exact, via Fourier-Motzkin elimination over ``fractions.Fraction``.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union


class EmptyChamberError(ValueError):
    """Raised when an operation requires a nonempty chamber."""


RationalLike = Union[int, str, Fraction]


def _frac(x: RationalLike) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ---------------------------------------------------------------------------
# Monoid forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonoidForm:
    """A nonnegative rational linear form ``sum_i c_i * x_i``.

    Immutable and finitely supported; ``coeffs`` is a sorted tuple of
    ``(parameter_index, coefficient)`` pairs with every coefficient > 0.
    The zero form has empty support.
    """

    coeffs: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self):
        for i, c in self.coeffs:
            if c <= 0:
                raise ValueError(f"coefficient of x{i} must be positive, got {c}")
            if i < 0:
                raise ValueError(f"parameter index must be >= 0, got {i}")
        idx = [i for i, _ in self.coeffs]
        if idx != sorted(set(idx)):
            raise ValueError("coefficients must be sorted by parameter index")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "MonoidForm":
        return MonoidForm(())

    @staticmethod
    def param(i: int, coeff: RationalLike = 1) -> "MonoidForm":
        c = _frac(coeff)
        if c == 0:
            return MonoidForm(())
        return MonoidForm(((i, c),))

    @staticmethod
    def from_dict(d: Mapping[int, RationalLike]) -> "MonoidForm":
        items = sorted((i, _frac(c)) for i, c in d.items() if _frac(c) != 0)
        return MonoidForm(tuple(items))

    # -- queries -----------------------------------------------------------

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def max_param(self) -> int:
        """Largest parameter index used, or -1 for the zero form."""
        return self.coeffs[-1][0] if self.coeffs else -1

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        return sum((c * point[i] for i, c in self.coeffs), Fraction(0))

    # -- arithmetic (stays inside the monoid) ------------------------------

    def __add__(self, other: "MonoidForm") -> "MonoidForm":
        d = dict(self.coeffs)
        for i, c in other.coeffs:
            d[i] = d.get(i, Fraction(0)) + c
        return MonoidForm.from_dict(d)

    def scale(self, q: RationalLike) -> "MonoidForm":
        q = _frac(q)
        if q < 0:
            raise ValueError("cannot scale a monoid form by a negative rational")
        if q == 0:
            return MonoidForm.zero()
        return MonoidForm(tuple((i, c * q) for i, c in self.coeffs))

    def try_sub(self, other: "MonoidForm") -> Optional["MonoidForm"]:
        """``self - other`` if it stays coefficientwise nonnegative, else None."""
        d = dict(self.coeffs)
        for i, c in other.coeffs:
            d[i] = d.get(i, Fraction(0)) - c
        if any(c < 0 for c in d.values()):
            return None
        return MonoidForm.from_dict(d)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in self.coeffs:
            parts.append(f"x{i}" if c == 1 else f"{c}*x{i}")
        return "+".join(parts)


def form_diff(a: MonoidForm, b: MonoidForm) -> dict[int, Fraction]:
    """Signed coefficient dictionary of ``a - b`` (zero entries dropped)."""
    d = dict(a.coeffs)
    for i, c in b.coeffs:
        d[i] = d.get(i, Fraction(0)) - c
    return {i: c for i, c in d.items() if c != 0}


# ---------------------------------------------------------------------------
# Chambers
# ---------------------------------------------------------------------------

REL_LT = "<"
REL_EQ = "="
REL_LE = "<="
_RELS = (REL_LT, REL_EQ, REL_LE)


@dataclass(frozen=True)
class Constraint:
    lhs: MonoidForm
    rel: str
    rhs: MonoidForm

    def __post_init__(self):
        if self.rel not in _RELS:
            raise ValueError(f"relation must be one of {_RELS}, got {self.rel!r}")

    def __repr__(self) -> str:
        return f"{self.lhs!r} {self.rel} {self.rhs!r}"


@dataclass(frozen=True)
class Chamber:
    """A rational polyhedral cone of strictly positive parameter values.

    Cut out by the listed order constraints together with the implicit
    positivity ``x_i > 0`` of every base parameter.  Degenerations are
    modeled by explicit face passage, never by zero parameter values.
    """

    constraints: tuple[Constraint, ...]
    num_params: int

    @staticmethod
    def top(num_params: int) -> "Chamber":
        """The unconstrained chamber (all positive parameter values)."""
        return Chamber((), num_params)

    def with_constraints(self, extra: Iterable[Constraint],
                         num_params: Optional[int] = None) -> "Chamber":
        n = self.num_params if num_params is None else num_params
        return Chamber(self.constraints + tuple(extra), n)

    def extended(self, extra_params: int) -> "Chamber":
        return Chamber(self.constraints, self.num_params + extra_params)

    def __repr__(self) -> str:
        body = ", ".join(repr(c) for c in self.constraints) or "T"
        return f"Chamber[{self.num_params}]({body})"


# ---------------------------------------------------------------------------
# Fourier-Motzkin elimination
# ---------------------------------------------------------------------------
#
# A row is (coeffs, strict): sum_i coeffs[i]*x_i  <  0   (strict)
#                            sum_i coeffs[i]*x_i  <= 0   (non-strict)
# All systems here are homogeneous, so no constant term is carried.

_Row = tuple[tuple[Fraction, ...], bool]


def _normalize_row(coeffs: Sequence[Fraction], strict: bool) -> Optional[_Row]:
    """Scale so the first nonzero coefficient has absolute value 1.

    Returns None for rows that are trivially true (0 <= 0); a trivially
    false row (0 < 0) is kept so infeasibility is visible downstream.
    """
    lead = next((c for c in coeffs if c != 0), None)
    if lead is None:
        return None if not strict else (tuple(coeffs), True)
    scale = 1 / abs(lead)
    return (tuple(c * scale for c in coeffs), strict)


def _rows_of_chamber(ch: Chamber, extra: Sequence[tuple[Mapping[int, Fraction], bool]] = ()) -> list[_Row]:
    n = ch.num_params
    rows: list[_Row] = []

    def add(diff: Mapping[int, Fraction], strict: bool):
        coeffs = [Fraction(0)] * n
        for i, c in diff.items():
            if i >= n:
                raise ValueError(f"parameter x{i} outside chamber with {n} parameters")
            coeffs[i] = c
        r = _normalize_row(coeffs, strict)
        if r is not None:
            rows.append(r)

    for i in range(n):
        add({i: Fraction(-1)}, True)  # x_i > 0
    for con in ch.constraints:
        diff = form_diff(con.lhs, con.rhs)
        if con.rel == REL_LT:
            add(diff, True)
        elif con.rel == REL_LE:
            add(diff, False)
        else:  # equality: two opposite non-strict inequalities
            add(diff, False)
            add({i: -c for i, c in diff.items()}, False)
    for diff, strict in extra:
        add(dict(diff), strict)
    return rows


def _eliminate(rows: list[_Row], var: int) -> list[_Row]:
    zero, pos, neg = [], [], []
    for coeffs, strict in rows:
        c = coeffs[var]
        if c == 0:
            zero.append((coeffs, strict))
        elif c > 0:
            pos.append((coeffs, strict))
        else:
            neg.append((coeffs, strict))
    out = dict.fromkeys(zero)
    for (cp, sp), (cn, sn) in itertools.product(pos, neg):
        # cp[var] > 0 > cn[var]; cancel var
        a, b = cp[var], -cn[var]
        combo = [b * p + a * q for p, q in zip(cp, cn)]
        r = _normalize_row(combo, sp or sn)
        if r is not None:
            out[r] = None
    return list(out)


def _systems(rows: list[_Row], n: int) -> list[list[_Row]]:
    """Elimination tower: systems[k] constrains variables k..n-1 only."""
    systems = [rows]
    for v in range(n):
        rows = _eliminate(rows, v)
        systems.append(rows)
    return systems


def _rows_feasible(rows: list[_Row], n: int) -> bool:
    final = _systems(rows, n)[-1]
    # only all-zero rows survive; a strict one encodes 0 < 0
    return not any(strict for _, strict in final)


@lru_cache(maxsize=None)
def _systems_cached(ch: Chamber) -> list[list[_Row]]:
    return _systems(_rows_of_chamber(ch), ch.num_params)


@lru_cache(maxsize=None)
def _chamber_feasible_cached(ch: Chamber) -> bool:
    return _rows_feasible(_rows_of_chamber(ch), ch.num_params)


def chamber_feasible(ch: Chamber) -> bool:
    """True iff some strictly positive rational point satisfies every constraint."""
    return _chamber_feasible_cached(ch)


@lru_cache(maxsize=None)
def _holds_throughout_cached(ch: Chamber, diff_items: tuple, strict_opposite: bool) -> bool:
    opp = {i: -c for i, c in diff_items}
    rows = _rows_of_chamber(ch, extra=[(opp, strict_opposite)])
    return not _rows_feasible(rows, ch.num_params)


def _holds_throughout(ch: Chamber, diff: Mapping[int, Fraction], strict_opposite: bool) -> bool:
    """True iff ``diff <= 0`` (resp. < 0) on the whole chamber.

    Decided by checking that the opposite open condition is infeasible.
    """
    return _holds_throughout_cached(ch, tuple(sorted(diff.items())), strict_opposite)


# ---------------------------------------------------------------------------
# Ordering over a chamber
# ---------------------------------------------------------------------------

class Ordering(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"


def form_sub_sign(a: MonoidForm, b: MonoidForm, ch: Chamber) -> Ordering:
    """Sign of ``a - b``, uniform over the relative interior of ``ch``.

    Incomparable when neither ``a <= b`` nor ``a >= b`` holds throughout.
    A one-sided inequality that is not an identity is automatically strict
    on the relative interior, so the four outcomes are exhaustive and
    mutually exclusive.
    """
    diff = form_diff(a, b)
    if not diff:
        return Ordering.EQUAL
    if not chamber_feasible(ch):
        raise EmptyChamberError("empty chamber")
    le = _holds_throughout(ch, diff, strict_opposite=True)        # a <= b
    ge = _holds_throughout(ch, {i: -c for i, c in diff.items()}, True)
    if le and ge:
        return Ordering.EQUAL
    if le:
        return Ordering.LESS
    if ge:
        return Ordering.GREATER
    return Ordering.INCOMPARABLE


def form_le(a: MonoidForm, b: MonoidForm, ch: Chamber) -> bool:
    return form_sub_sign(a, b, ch) in (Ordering.LESS, Ordering.EQUAL)


def form_min(forms: Sequence[MonoidForm], ch: Chamber) -> MonoidForm:
    """Minimum of comparable forms in chamber order."""
    best = forms[0]
    for f in forms[1:]:
        s = form_sub_sign(f, best, ch)
        if s is Ordering.INCOMPARABLE:
            raise ValueError(f"forms {best!r} and {f!r} are incomparable in chamber")
        if s is Ordering.LESS:
            best = f
    return best


# ---------------------------------------------------------------------------
# Sampling rational interior points
# ---------------------------------------------------------------------------

def sample_point(ch: Chamber, rng: Optional[random.Random] = None) -> tuple[Fraction, ...]:
    """An exact rational point in the relative interior of the chamber.

    Back-substitutes through the Fourier-Motzkin tower, picking a point
    strictly inside the allowed interval at every level whenever the
    interval is nondegenerate.
    """
    rng = rng or random.Random()
    n = ch.num_params
    if n == 0:
        if not chamber_feasible(ch):
            raise EmptyChamberError("empty chamber")
        return ()
    systems = _systems_cached(ch)
    if any(strict for _, strict in systems[-1]):
        raise EmptyChamberError("empty chamber")

    values: list[Optional[Fraction]] = [None] * n
    for v in range(n - 1, -1, -1):
        lo: Optional[Fraction] = None
        lo_strict = True
        hi: Optional[Fraction] = None
        hi_strict = True
        for coeffs, strict in systems[v]:
            c = coeffs[v]
            if c == 0:
                continue
            rest = sum((coeffs[j] * values[j] for j in range(v + 1, n) if coeffs[j] != 0),
                       Fraction(0))
            bound = -rest / c
            if c > 0:  # x <(=) bound
                if hi is None or bound < hi or (bound == hi and strict):
                    hi, hi_strict = bound, strict
            else:      # x >(=) bound
                if lo is None or bound > lo or (bound == lo and strict):
                    lo, lo_strict = bound, strict
        if lo is None:
            lo, lo_strict = Fraction(0), True
        if hi is None:
            values[v] = lo + Fraction(rng.randint(1, 64), rng.randint(1, 16))
        elif lo == hi:
            values[v] = lo  # forced by an equality
        else:
            t = Fraction(rng.randint(1, 63), 64)
            values[v] = lo + (hi - lo) * t
    return tuple(values)  # type: ignore[arg-type]


def constraint_satisfied(con: Constraint, point: Sequence[Fraction]) -> bool:
    l, r = con.lhs.evaluate(point), con.rhs.evaluate(point)
    if con.rel == REL_LT:
        return l < r
    if con.rel == REL_LE:
        return l <= r
    return l == r


# ---------------------------------------------------------------------------
# Refinement into totally preordered chambers
# ---------------------------------------------------------------------------

def chamber_refinements(forms: Sequence[MonoidForm], ch: Chamber) -> list[Chamber]:
    """All feasible refinements of ``ch`` totally preordering the given forms.

    Each refinement is an ordered partition of the (deduplicated) forms
    into equality blocks, listed strictly increasing; the refinements have
    pairwise disjoint interiors and cover ``ch``.  Enumeration is by
    incremental insertion with feasibility pruning, so the output order is
    deterministic.
    """
    if not chamber_feasible(ch):
        raise EmptyChamberError("empty chamber")
    distinct: list[MonoidForm] = []
    for f in forms:
        if f not in distinct:
            distinct.append(f)
    if len(distinct) <= 1:
        return [ch]

    results: list[Chamber] = []

    def order_constraints(blocks: Sequence[list[MonoidForm]]) -> list[Constraint]:
        cons = []
        for blk in blocks:
            rep = blk[0]
            for other in blk[1:]:
                cons.append(Constraint(rep, REL_EQ, other))
        for left, right in zip(blocks, blocks[1:]):
            cons.append(Constraint(left[0], REL_LT, right[0]))
        return cons

    def insert(k: int, blocks: list[list[MonoidForm]]):
        if not chamber_feasible(ch.with_constraints(order_constraints(blocks))):
            return
        if k == len(distinct):
            results.append(ch.with_constraints(order_constraints(blocks)))
            return
        f = distinct[k]
        for pos in range(2 * len(blocks) + 1):
            if pos % 2 == 0:  # new singleton block in gap pos//2
                nb = blocks[:pos // 2] + [[f]] + blocks[pos // 2:]
            else:             # join existing block (pos-1)//2
                i = (pos - 1) // 2
                nb = [list(b) for b in blocks]
                nb[i].append(f)
            insert(k + 1, nb)

    insert(1, [[distinct[0]]])
    return results


def refines(fine: Chamber, coarse: Chamber) -> bool:
    """True iff every point of ``fine`` satisfies all constraints of ``coarse``."""
    if not chamber_feasible(fine):
        return False
    for con in coarse.constraints:
        diff = form_diff(con.lhs, con.rhs)
        if con.rel == REL_LT:
            ok = _holds_throughout(fine, diff, strict_opposite=False)
        elif con.rel == REL_LE:
            ok = _holds_throughout(fine, diff, strict_opposite=True)
        else:
            ok = (_holds_throughout(fine, diff, True)
                  and _holds_throughout(fine, {i: -c for i, c in diff.items()}, True))
        if not ok:
            return False
    return True
