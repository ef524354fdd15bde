"""Limit sets of rank-one Kleinian representations and their convergence."""

from .automaton import (
    AutomatonVertex,
    CosetMinusFinite,
    Explicit,
    RelativeAutomaton,
    VerificationReport,
    build_pingpong_automaton,
    default_caps,
    export_dot,
    refine_limit_set,
    reverify_under_deformation,
    verify_automaton,
)
from .cannon_thurston import (
    CTSample,
    TypePreservationReport,
    check_type_preserving,
    ct_composition_check,
    ct_map,
    ct_uniform_deviation,
)
from .convergence import (
    TruncationParams,
    check_algebraic,
    check_chabauty,
    check_peripheral_stability,
    check_relative_strong,
    convergence_report,
)
from .errors import *  # noqa: F401,F403
from .families import RepFamily, builtin_family
from .groups import (
    GroupSpec,
    PeripheralSpec,
    Representation,
    Word,
    alternating_form,
    enumerate_ball,
    enumerate_sphere,
    evaluate,
    relative_length,
)
from .limit_set import LimitSetSample, hausdorff_distance, parabolic_fiber, sample_limit_set
from .moebius import (
    BoundaryPoint,
    FixedPoint,
    IsometryType,
    Moebius,
    SphericalCap,
    apply,
    boundary_distance,
    cap_contains,
    cap_image,
    cap_inflate,
    classify,
    compose,
)

__version__ = "0.1.0"
