"""Combinatorics of genus-1 logarithmic stable maps to products of
projective spaces: radial alignment, contraction radii, elliptic
singularity contractions, tropical well-spacedness, divisor-completion
lifts, and the dimension calculus for moduli strata."""

from .forms import (
    Chamber,
    Constraint,
    EmptyChamberError,
    MonoidForm,
    Ordering,
    chamber_feasible,
    chamber_refinements,
    form_sub_sign,
    sample_point,
)
from .curve import (
    Circuit,
    Contraction,
    Destabilization,
    Edge,
    Leg,
    NoAdmissibleRadiusError,
    NotGenusOneError,
    Radius,
    SingularityDescriptor,
    TropicalCurve,
    Vertex,
    alignment_chambers,
    circuit_of,
    contract_circle,
    contraction_radius_for_m,
    destabilize_at,
    lambda_of,
    radial_distances,
)
from .tropmap import (
    Expansion,
    TargetModel,
    TropicalMap,
    check_balancing,
    check_positions,
    complete_divisor,
    complete_to_toric,
    expand,
    forget_divisor,
    is_transverse,
    map_contraction_radius,
)
from .wellspaced import (
    StratumType,
    WSVerdict,
    enumerate_strata,
    is_wellspaced,
    toric_wellspaced,
)
from .dimension import (
    ContactMatrix,
    StratumGraph,
    StratumVertex,
    degree_genus_p1p1,
    expected_dim,
    expected_dim_relative,
    fictitious_forgetful,
    stratum_dim,
)

__version__ = "0.1.0"
