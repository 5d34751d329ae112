"""Change of variables w -> p -> q -> r and the unknown pair (q, r)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from core.exceptions import InvalidArgumentError, PhysicalityError
from core.forward import (
    ConductivityProfile,
    ForwardSlice,
    fundamental_solution,
    fundamental_solution_dk,
    k_derivative,
    solve_forward,
    solve_sensitivity,
)
from core.grid import Field, Grid1D, KGrid, h2_norm, require_same_grid


@dataclass(frozen=True)
class FieldPair:
    """The unknowns ``(q, r)`` of the minimization for one frequency."""

    q: Field
    r: Field
    k: float
    epsilon: float

    def __post_init__(self):
        require_same_grid(self.q, self.r)
        if not self.epsilon > 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def grid(self) -> Grid1D:
        return self.q.grid

    def with_arrays(self, q: np.ndarray, r: np.ndarray) -> "FieldPair":
        return FieldPair(self.q.with_values(q), self.r.with_values(r), self.k, self.epsilon)

    def norm_sum(self) -> float:
        """``||q||_H2 + ||r||_H2``, the quantity bounded by the ball radius."""
        return h2_norm(self.q) + h2_norm(self.r)

    def __sub__(self, other: "FieldPair") -> "FieldPair":
        return FieldPair(self.q - other.q, self.r - other.r, self.k, self.epsilon)


def pair_distance(a: FieldPair, b: FieldPair) -> float:
    """``||qa - qb||_H2 + ||ra - rb||_H2``."""
    return (a - b).norm_sum()


def compute_p(w: Field, k: float) -> Field:
    if np.any(w.values <= 0):
        raise PhysicalityError(f"w must be positive to take ln(w), min is {w.values.min():.6g}")
    if k <= 0:
        raise InvalidArgumentError(f"frequency k must be positive, got {k}")
    return w.with_values(np.log(w.values) / k)


def compute_q(p_per_k: Sequence[Field], kg: KGrid) -> list[Field]:
    """``q = dp/dk`` by finite differences along the k-grid, nodewise in z."""
    if len(p_per_k) < 3:
        raise InvalidArgumentError(f"need at least 3 k-samples, got {len(p_per_k)}")
    if len(p_per_k) != kg.n_k:
        raise InvalidArgumentError(f"family has {len(p_per_k)} members, k-grid has {kg.n_k}")
    require_same_grid(*p_per_k)
    stacked = np.stack([p.values for p in p_per_k])
    derivative = k_derivative(stacked, kg)
    return [p.with_values(row) for p, row in zip(p_per_k, derivative)]


def compute_r(q: Field, p: Field, epsilon: float) -> Field:
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    return q - epsilon * p


def chain_family(
    slices: Sequence[ForwardSlice], kg: KGrid, epsilon: float
) -> list[FieldPair]:
    """Pairs built from forward p-fields with ``q`` differenced along the k-grid."""
    p_family = [s.p for s in slices]
    q_family = compute_q(p_family, kg)
    return [
        FieldPair(q, compute_r(q, p, epsilon), float(k), epsilon)
        for q, p, k in zip(q_family, p_family, kg.values)
    ]


def exact_chain(
    sigma: ConductivityProfile, k: float, epsilon: float
) -> tuple[FieldPair, Field]:
    """Pair and p-field with ``q`` from the sensitivity solve instead of k-differences.

    Returns ``(FieldPair, p)``; the only error left is the spatial discretization.
    """
    fwd = solve_forward(sigma, k)
    dvs = solve_sensitivity(sigma, k, fwd).values
    z = sigma.grid.nodes
    u0, _ = fundamental_solution(z, k)
    du0 = fundamental_solution_dk(z, k)
    vs, w = fwd.v_scattered.values, fwd.w.values
    dw = dvs / u0 - vs * du0 / u0**2
    q = dw / (k * w) - np.log(w) / k**2
    q_field = fwd.p.with_values(q)
    return FieldPair(q_field, compute_r(q_field, fwd.p, epsilon), float(k), epsilon), fwd.p
