"""Grid sub-package public re-exports."""

from .grid import Field, Grid1D, KGrid, make_grid, make_k_grid, require_same_grid
from .operators import (
    constrained_basis,
    constrained_traces,
    d1_matrix,
    d2_matrix,
    diff1,
    diff2,
    gram_matrix,
    h2_inner,
    h2_norm,
    quad_weighted,
    riesz_from_load,
    riesz_h2,
    trapezoid_weights,
)

__all__: list[str] = [
    "Field",
    "Grid1D",
    "KGrid",
    "make_grid",
    "make_k_grid",
    "require_same_grid",
    "constrained_basis",
    "constrained_traces",
    "d1_matrix",
    "d2_matrix",
    "diff1",
    "diff2",
    "gram_matrix",
    "h2_inner",
    "h2_norm",
    "quad_weighted",
    "riesz_from_load",
    "riesz_h2",
    "trapezoid_weights",
]
