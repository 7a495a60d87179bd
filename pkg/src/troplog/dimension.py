"""Dimension calculus for genus 0/1 map moduli and their boundary strata.

Expected dimensions come from Riemann-Roch; relative variants subtract
one condition per contact order.  Stratum dimensions are assembled from
decorated dual graphs: per-vertex moduli contributions, extra base
choices, and one evaluation-diagonal condition per gluing edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .tropmap import TargetModel


class ContactOrderError(ValueError):
    pass


def expected_dim(g: int, n: int, target: TargetModel, degree: Sequence[int]) -> int:
    """Riemann-Roch expected dimension of the map moduli.

    deg c1 + (dim - 3)(1 - g) + n, with deg c1 = sum_i (n_i + 1) d_i over
    the factors.
    """
    if g not in (0, 1):
        raise ValueError("genus must be 0 or 1")
    if len(degree) != target.num_factors:
        raise ValueError("one degree entry per factor expected")
    c1 = sum((ni + 1) * d for ni, d in zip(target.factors, degree))
    return c1 + (target.dim - 3) * (1 - g) + n


@dataclass(frozen=True)
class ContactMatrix:
    """Contact orders of the markings along the divisor components."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.rows:
            width = len(self.rows[0])
            if any(len(r) != width for r in self.rows):
                raise ValueError("ragged contact matrix")
        if any(x < 0 for r in self.rows for x in r):
            raise ValueError("contact orders must be nonnegative")

    @property
    def num_markings(self) -> int:
        return len(self.rows)

    @property
    def num_divisors(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def column_sum(self, j: int) -> int:
        return sum(r[j] for r in self.rows)

    def total(self) -> int:
        return sum(x for r in self.rows for x in r)

    def validate_against(self, target: TargetModel, degree: Sequence[int]) -> None:
        """Column sums must match the intersection numbers degree . divisor."""
        if self.rows and self.num_divisors != target.num_divisors:
            raise ContactOrderError("contact matrix width differs from divisor count")
        for j in range(self.num_divisors):
            fi = target.divisors[j][0]
            if self.column_sum(j) != degree[fi]:
                raise ContactOrderError(
                    "contact orders inconsistent with degree "
                    f"(column {j} sums to {self.column_sum(j)}, "
                    f"factor degree is {degree[fi]})")


def expected_dim_relative(g: int, n: int, target: TargetModel,
                          degree: Sequence[int], gamma: ContactMatrix) -> int:
    """Expected dimension minus one condition per contact order."""
    gamma.validate_against(target, degree)
    return expected_dim(g, n, target, degree) - gamma.total()


def degree_genus_p1p1(a: int, b: int) -> int:
    """Genus of a smooth curve of bidegree (a, b) on the quadric surface.

    (a-1)(b-1) by adjunction; rulings (a or b zero) are rational, so the
    value is clamped at zero.
    """
    if a < 0 or b < 0:
        raise ValueError("bidegree entries must be nonnegative")
    if a == 0 or b == 0:
        return 0
    return (a - 1) * (b - 1)


# ---------------------------------------------------------------------------
# Stratum dimensions from decorated dual graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StratumVertex:
    """One component of a boundary stratum.

    The dimension contribution is either computed from (genus, markings,
    target, degree) by the expected-dimension formula, or given as an
    explicit integer; explicit values must carry a provenance note, since
    actual and virtual dimensions of a vertex moduli may differ.
    """

    genus: int
    markings: int = 0
    target: Optional[TargetModel] = None
    degree: Optional[tuple[int, ...]] = None
    explicit_dim: Optional[int] = None
    provenance: Optional[str] = None
    extra_params: int = 0

    def contribution(self) -> int:
        if self.explicit_dim is not None:
            if not self.provenance:
                raise ValueError(
                    "explicit vertex dimension requires a provenance note")
            return self.explicit_dim
        if self.target is None or self.degree is None:
            raise ValueError("vertex needs either a formula input or an explicit dim")
        return expected_dim(self.genus, self.markings, self.target, self.degree)


@dataclass(frozen=True)
class StratumGraph:
    vertices: tuple[StratumVertex, ...]
    num_edges: int
    ambient_dim: int

    def __post_init__(self):
        if self.num_edges < 0 or self.ambient_dim < 0:
            raise ValueError("edge count and ambient dimension must be nonnegative")


def stratum_dim(s: StratumGraph) -> int:
    """Vertex contributions plus base choices minus one diagonal per edge."""
    total = sum(v.contribution() + v.extra_params for v in s.vertices)
    return total - s.num_edges * s.ambient_dim


# ---------------------------------------------------------------------------
# Fictitious markings
# ---------------------------------------------------------------------------

def fictitious_forgetful(gamma: ContactMatrix, divisor: int,
                         markings: Sequence[int]) -> tuple[int, ContactMatrix]:
    """Multiplicity and reduced matrix when forgetting a fictitious block.

    The given markings must meet the divisor transversally and meet no
    other divisor; no other marking may touch the divisor.  Forgetting
    them together with the divisor is generically m!-to-1 on moduli.
    """
    mset = set(markings)
    if not 0 <= divisor < gamma.num_divisors:
        raise ValueError(f"unknown divisor column {divisor}")
    for i, row in enumerate(gamma.rows):
        if i in mset:
            if row[divisor] != 1:
                raise ContactOrderError("markings/divisor not fictitious")
            if any(x != 0 for j, x in enumerate(row) if j != divisor):
                raise ContactOrderError("markings/divisor not fictitious")
        else:
            if gamma.num_divisors and row[divisor] != 0:
                raise ContactOrderError("markings/divisor not fictitious")
    reduced = ContactMatrix(tuple(
        tuple(x for j, x in enumerate(row) if j != divisor)
        for i, row in enumerate(gamma.rows) if i not in mset))
    return math.factorial(len(mset)), reduced
