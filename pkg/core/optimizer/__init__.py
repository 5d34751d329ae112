"""Descent sub-package public re-exports."""

from .descent import (
    DescentConfig,
    DescentHistory,
    ThetaEstimate,
    estimate_theta,
    gd_step,
    minimize,
    probe_step_size,
    project_to_ball,
)

__all__: list[str] = [
    "DescentConfig",
    "DescentHistory",
    "ThetaEstimate",
    "estimate_theta",
    "gd_step",
    "minimize",
    "probe_step_size",
    "project_to_ball",
]
