"""Forward-model sub-package public re-exports."""

from .profiles import (
    ConductivityProfile,
    ProfileFactory,
    bump_profile,
    flat_profile,
    load_profile,
    two_layer_profile,
)
from .solver import (
    DataG,
    ForwardSlice,
    ForwardSolution,
    add_noise,
    boundary_trace,
    data_from_solution,
    fundamental_solution,
    fundamental_solution_dk,
    k_derivative,
    robin_residuals,
    solve_forward,
    solve_forward_family,
    solve_sensitivity,
    synth_data,
)

__all__: list[str] = [
    "ConductivityProfile",
    "ProfileFactory",
    "bump_profile",
    "flat_profile",
    "load_profile",
    "two_layer_profile",
    "DataG",
    "ForwardSlice",
    "ForwardSolution",
    "add_noise",
    "boundary_trace",
    "data_from_solution",
    "fundamental_solution",
    "fundamental_solution_dk",
    "k_derivative",
    "robin_residuals",
    "solve_forward",
    "solve_forward_family",
    "solve_sensitivity",
    "synth_data",
]
