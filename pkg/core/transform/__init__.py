"""Change-of-variables sub-package public re-exports."""

from .boundary import (
    BOUNDARY_MODE_NAMES,
    TRACE_NAMES,
    BoundaryMode,
    BoundarySet,
    LiftPair,
    boundary_from_data,
    build_lift,
    compare_boundary_modes,
    lift_distance,
    pair_traces,
)
from .chain import (
    FieldPair,
    chain_family,
    compute_p,
    compute_q,
    compute_r,
    exact_chain,
    pair_distance,
)

__all__: list[str] = [
    "BOUNDARY_MODE_NAMES",
    "TRACE_NAMES",
    "BoundaryMode",
    "BoundarySet",
    "LiftPair",
    "boundary_from_data",
    "build_lift",
    "compare_boundary_modes",
    "lift_distance",
    "pair_traces",
    "FieldPair",
    "chain_family",
    "compute_p",
    "compute_q",
    "compute_r",
    "exact_chain",
    "pair_distance",
]
