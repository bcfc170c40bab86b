"""Omnidirectional sets: sets that contain approximate arithmetic patches in
every direction while staying small in the Assouad sense."""

from .assouad import (
    CertificateError,
    DimEstimate,
    LowerBoundCertificate,
    ScanPlan,
    ScanRecord,
    certify_lower_bound,
    estimate_assouad,
    local_exponent,
    proof_scan_plan,
)
from .construction import (
    DIAMONDS,
    ORIGIN,
    SEGMENTS,
    BudgetExceeded,
    ConstructionError,
    DiamondPiece,
    OmniSet,
    build_diamond_set,
    build_omni_set,
    build_segment,
)
from .covering import (
    CoverBracket,
    analytic_cover_bound,
    cover_bracket,
    cover_count_segment,
    n_of,
    n_plus,
    packing_lower,
    packing_subset,
)
from .directions import (
    DirectionError,
    OrientationTuple,
    RationalDirection,
    approximate_direction,
    cantor_pair,
    cantor_unpair,
    direction_at,
    enumerate_directions,
    enumerate_orientation_tuples,
    index_of,
    is_primitive,
    orientation_tuple_at,
)
from .geometry import (
    Ball,
    GeometryError,
    Orientation,
    SegmentPiece,
    big_l,
    clip_segment_to_ball,
    ell,
    min_pairwise_gap,
)
from .patches import (
    ArithmeticPatch,
    CertificationError,
    EpsAP,
    NoInitialPoint,
    TupleBudgetExceeded,
    Verdict,
    find_ap_in_omni,
    find_patch_in_diamond,
    initial_point_of,
    patch_points,
    verify_eps_ap,
)

__version__ = "0.1.0"
