"""Reconstruction sub-package public re-exports."""

from .reconstruction import (
    ErrorReport,
    InversionResult,
    assemble_result,
    below_one,
    error_metrics,
    l2_norm,
    recover_p,
    sigma_average,
    sigma_error_curve,
    sigma_of_k,
    sigma_spread,
)

__all__: list[str] = [
    "ErrorReport",
    "InversionResult",
    "assemble_result",
    "below_one",
    "error_metrics",
    "l2_norm",
    "recover_p",
    "sigma_average",
    "sigma_error_curve",
    "sigma_of_k",
    "sigma_spread",
]
