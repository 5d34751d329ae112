"""Laplace-domain forward problem and synthetic boundary data.

The total field is split as ``v = u0 + vs`` where ``u0`` is the free-space
fundamental solution. The scattered part solves

    vs'' - k sigma vs = k (sigma - 1) u0        on (0, Z)
    vs'(0) = sqrt(k) vs(0),   vs'(Z) = -sqrt(k) vs(Z)

The Robin rows encode the decaying exponentials outside ``(0, Z)`` exactly, so
no delta source is discretized.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from core.exceptions import InvalidArgumentError, PhysicalityError, SolverError
from core.forward.profiles import ConductivityProfile
from core.grid import Field, Grid1D, KGrid, d1_matrix, d2_matrix
from core.workers import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DataG:
    """Boundary data per frequency: g = v_z(0+, k), its k-derivative and the trace v(0, k)."""

    k_grid: KGrid
    g_values: np.ndarray
    g_prime: np.ndarray
    v0_values: np.ndarray
    v0_prime: np.ndarray
    noise_level: float = 0.0

    def __post_init__(self):
        for name in ("g_values", "g_prime", "v0_values", "v0_prime"):
            values = np.array(getattr(self, name), dtype=float)
            if values.shape != (self.k_grid.n_k,):
                raise InvalidArgumentError(
                    f"{name} has shape {values.shape}, k-grid needs ({self.k_grid.n_k},)"
                )
            if not np.all(np.isfinite(values)):
                raise InvalidArgumentError(f"{name} must be finite")
            values.flags.writeable = False
            object.__setattr__(self, name, values)
        if not 0.0 <= self.noise_level < 1.0:
            raise InvalidArgumentError(f"noise_level must lie in [0, 1), got {self.noise_level}")


@dataclass(frozen=True)
class ForwardSlice:
    """Forward solution for one frequency."""

    k: float
    v_scattered: Field
    v_total: Field
    w: Field
    p: Field


@dataclass(frozen=True)
class ForwardSolution:
    sigma: ConductivityProfile
    k_grid: KGrid
    slices: tuple[ForwardSlice, ...]


def _check_k(k: float) -> float:
    if not np.isfinite(k) or k <= 0:
        raise InvalidArgumentError(f"frequency k must be positive, got {k}")
    return float(k)


def fundamental_solution(z, k: float):
    """Return ``(u0, du0/dz)`` of ``exp(-sqrt(k)|z|) / (2 sqrt(k))``.

    The derivative uses the ``z > 0`` branch at ``z = 0``.
    """
    sk = np.sqrt(_check_k(k))
    z = np.asarray(z, dtype=float)
    u0 = np.exp(-sk * np.abs(z)) / (2.0 * sk)
    du0 = np.where(z >= 0, -sk * u0, sk * u0)
    if u0.ndim == 0:
        return float(u0), float(du0)
    return u0, du0


def fundamental_solution_dk(z, k: float) -> np.ndarray:
    """k-derivative of ``u0`` for ``z >= 0``."""
    sk = np.sqrt(_check_k(k))
    u0, _ = fundamental_solution(z, k)
    return u0 * (-np.asarray(z) / (2.0 * sk) - 1.0 / (2.0 * k))


def _robin_operator(sigma: ConductivityProfile, k: float) -> sparse.csc_matrix:
    grid = sigma.grid
    sk = np.sqrt(k)
    interior = (d2_matrix(grid) - k * sparse.diags(sigma.values.values)).tocsr()[1:-1]
    d1 = d1_matrix(grid)
    first = d1[0] - sk * sparse.eye(1, grid.n_nodes, 0)
    last = d1[grid.n_nodes - 1] + sk * sparse.eye(1, grid.n_nodes, grid.n_nodes - 1)
    return sparse.vstack([first, interior, last]).tocsc()


def _solve(operator: sparse.csc_matrix, rhs: np.ndarray, what: str) -> np.ndarray:
    try:
        solution = spsolve(operator, rhs)
    except RuntimeError as exc:
        raise SolverError(f"{what}: sparse solve failed: {exc}") from exc
    if not np.all(np.isfinite(solution)):
        raise SolverError(f"{what}: sparse solve returned non-finite values")
    return solution


def solve_forward(sigma: ConductivityProfile, k: float) -> ForwardSlice:
    k = _check_k(k)
    grid = sigma.grid
    s = sigma.values.values
    u0, _ = fundamental_solution(grid.nodes, k)

    rhs = k * (s - 1.0) * u0
    rhs[[0, -1]] = 0.0
    vs = _solve(_robin_operator(sigma, k), rhs, f"forward solve k={k}")

    w = 1.0 + vs / u0
    if np.any(w <= 0):
        raise PhysicalityError(
            f"w <= 0 at {np.count_nonzero(w <= 0)} nodes for k={k}; refine the grid"
        )
    return ForwardSlice(
        k=k,
        v_scattered=Field(vs, grid),
        v_total=Field(u0 + vs, grid),
        w=Field(w, grid),
        p=Field(np.log(w) / k, grid),
    )


def solve_sensitivity(sigma: ConductivityProfile, k: float, fwd: ForwardSlice | None = None) -> Field:
    """k-derivative of the scattered field from the differentiated BVP."""
    k = _check_k(k)
    fwd = fwd or solve_forward(sigma, k)
    grid = sigma.grid
    s = sigma.values.values
    vs = fwd.v_scattered.values
    u0, _ = fundamental_solution(grid.nodes, k)
    u0_k = fundamental_solution_dk(grid.nodes, k)
    sk = np.sqrt(k)

    rhs = s * vs + (s - 1.0) * u0 + k * (s - 1.0) * u0_k
    rhs[0] = vs[0] / (2.0 * sk)
    rhs[-1] = -vs[-1] / (2.0 * sk)
    return Field(_solve(_robin_operator(sigma, k), rhs, f"sensitivity solve k={k}"), grid)


def boundary_trace(fwd: ForwardSlice) -> tuple[float, float]:
    """``(g, v(0))`` with ``g`` the one-sided derivative ``v_z(0+)``."""
    grid = fwd.v_scattered.grid
    _, du0 = fundamental_solution(0.0, fwd.k)
    g = du0 + float((d1_matrix(grid) @ fwd.v_scattered.values)[0])
    return g, float(fwd.v_total.values[0])


def solve_forward_family(
    sigma: ConductivityProfile, kg: KGrid, max_workers: int | None = None
) -> ForwardSolution:
    slices = parallel_map(lambda k: solve_forward(sigma, k), kg.values, max_workers)
    return ForwardSolution(sigma=sigma, k_grid=kg, slices=tuple(slices))


def k_derivative(values: np.ndarray, kg: KGrid) -> np.ndarray:
    """Central differences in k, second-order one-sided at the ends."""
    return np.gradient(np.asarray(values, dtype=float), kg.spacing, axis=0, edge_order=2)


def data_from_solution(solution: ForwardSolution) -> DataG:
    traces = np.array([boundary_trace(s) for s in solution.slices])
    g, v0 = traces[:, 0], traces[:, 1]
    kg = solution.k_grid
    return DataG(
        k_grid=kg,
        g_values=g,
        g_prime=k_derivative(g, kg),
        v0_values=v0,
        v0_prime=k_derivative(v0, kg),
    )


def synth_data(sigma: ConductivityProfile, kg: KGrid, max_workers: int | None = None) -> DataG:
    data = data_from_solution(solve_forward_family(sigma, kg, max_workers))
    logger.info(
        "synthesized data profile=%s n_k=%d g_range=[%.6g, %.6g]",
        sigma.name, kg.n_k, data.g_values.min(), data.g_values.max(),
    )
    return data


def add_noise(d: DataG, delta: float, seed: int) -> DataG:
    """Multiplicative uniform noise ``g (1 + delta xi)`` on the measured traces.

    The same model is applied to ``v(0, k)`` with an independent draw; the
    k-derivatives are recomputed from the noisy values.
    """
    if not 0.0 <= delta < 1.0:
        raise InvalidArgumentError(f"noise level must lie in [0, 1), got {delta}")
    if delta == 0.0:
        return replace(d, noise_level=0.0)
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-1.0, 1.0, size=(2, d.k_grid.n_k))
    g = d.g_values * (1.0 + delta * xi[0])
    v0 = d.v0_values * (1.0 + delta * xi[1])
    return DataG(
        k_grid=d.k_grid,
        g_values=g,
        g_prime=k_derivative(g, d.k_grid),
        v0_values=v0,
        v0_prime=k_derivative(v0, d.k_grid),
        noise_level=float(delta),
    )


def robin_residuals(fwd: ForwardSlice) -> tuple[float, float]:
    """Discrete Robin residuals of the scattered field at ``0`` and ``Z``."""
    grid: Grid1D = fwd.v_scattered.grid
    vs = fwd.v_scattered.values
    slopes = d1_matrix(grid) @ vs
    sk = np.sqrt(fwd.k)
    return float(slopes[0] - sk * vs[0]), float(slopes[-1] + sk * vs[-1])
