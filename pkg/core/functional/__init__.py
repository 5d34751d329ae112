"""Weighted functional sub-package public re-exports."""

from .carleman import (
    CarlemanTerms,
    FunctionalParams,
    ResidualSplit,
    carleman_check,
    carleman_norm_sq,
    convexity_gap,
    cwf,
    cwf_field,
    directional_derivative,
    euclidean_gradient,
    evaluate_J,
    gradient_J,
    gradient_norm,
    pair_inner,
    residual_L1,
    residual_L2,
    residual_split,
)
from .verify import (
    ConvexityFit,
    VerifyReport,
    constrained_field,
    fit_carleman_constants,
    fit_convexity_constants,
    gradient_check,
    random_constrained_field,
    random_pair_in_ball,
    run_verification,
    stratified_pairs,
)

__all__: list[str] = [
    "CarlemanTerms",
    "FunctionalParams",
    "ResidualSplit",
    "carleman_check",
    "carleman_norm_sq",
    "convexity_gap",
    "cwf",
    "cwf_field",
    "directional_derivative",
    "euclidean_gradient",
    "evaluate_J",
    "gradient_J",
    "gradient_norm",
    "pair_inner",
    "residual_L1",
    "residual_L2",
    "residual_split",
    "ConvexityFit",
    "VerifyReport",
    "constrained_field",
    "fit_carleman_constants",
    "fit_convexity_constants",
    "gradient_check",
    "random_constrained_field",
    "random_pair_in_ball",
    "run_verification",
    "stratified_pairs",
]
