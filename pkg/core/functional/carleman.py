"""Carleman-weighted least-squares functional for the pair (q, r).

For one frequency ``k`` the residuals are

    L1 = q_zz + N(q_z, r_z),      L2 = r_zz + N(q_z, r_z)

with the shared first-order part (``a = q_z``, ``d = q_z - r_z``)

    N = 2 (k / eps) a d + d^2 / eps^2 - 2 sqrt(k) a - d / (eps sqrt(k))

and the functional is the trapezoidal quadrature of
``(L1^2 + L2^2) exp(-2 lambda z)``. The gradient is assembled by transposing
the finite-difference stencils of the linearized residuals and then mapped to
the constrained space through the Gram matrix of the chosen metric.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from core.exceptions import InvalidArgumentError
from core.grid import (
    Field,
    Grid1D,
    d1_matrix,
    d2_matrix,
    gram_matrix,
    h2_norm,
    riesz_from_load,
    trapezoid_weights,
)
from core.transform import FieldPair, pair_traces

logger = logging.getLogger(__name__)

REPRESENTATIONS = ("h2", "l2")
TRACE_TOL = 1e-8


@dataclass(frozen=True)
class FunctionalParams:
    lam: float
    epsilon: float
    k: float
    R: float = 50.0

    def __post_init__(self):
        if not self.lam >= 1.0:
            raise InvalidArgumentError(f"Carleman parameter lambda must be >= 1, got {self.lam}")
        if not self.epsilon > 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {self.epsilon}")
        if not self.k > 0:
            raise InvalidArgumentError(f"frequency k must be positive, got {self.k}")
        if not self.R > 0:
            raise InvalidArgumentError(f"ball radius R must be positive, got {self.R}")


@dataclass(frozen=True)
class ResidualSplit:
    """Both residuals and their difference ``L2 - L1 = r_zz - q_zz = -eps p_zz``."""

    L1: Field
    L2: Field
    viscosity: Field


@dataclass(frozen=True)
class CarlemanTerms:
    lhs: float
    d2_term: float
    lower_term: float

    @property
    def ratio(self) -> float:
        denominator = self.d2_term + self.lower_term
        return self.lhs / denominator if denominator > 0 else float("nan")


def cwf(z, lam: float):
    """Carleman weight ``exp(-2 lambda z)``."""
    if not lam >= 1.0:
        raise InvalidArgumentError(f"Carleman parameter lambda must be >= 1, got {lam}")
    weight = np.exp(-2.0 * lam * np.asarray(z, dtype=float))
    return float(weight) if weight.ndim == 0 else weight


def cwf_field(grid: Grid1D, lam: float) -> Field:
    return Field(cwf(grid.nodes, lam), grid)


def _check_params(fp: FieldPair, params: FunctionalParams) -> None:
    if fp.epsilon != params.epsilon or fp.k != params.k:
        raise InvalidArgumentError(
            f"pair (k={fp.k}, epsilon={fp.epsilon}) does not match "
            f"params (k={params.k}, epsilon={params.epsilon})"
        )


def _first_order(a: np.ndarray, b: np.ndarray, params: FunctionalParams):
    """Shared term N and its partial derivatives in ``q_z`` and ``r_z``."""
    k, eps = params.k, params.epsilon
    sk = np.sqrt(k)
    d = a - b
    n = 2.0 * (k / eps) * a * d + d**2 / eps**2 - 2.0 * sk * a - d / (eps * sk)
    n_a = 2.0 * (k / eps) * (a + d) + 2.0 * d / eps**2 - 2.0 * sk - 1.0 / (eps * sk)
    n_b = -2.0 * (k / eps) * a - 2.0 * d / eps**2 + 1.0 / (eps * sk)
    return n, n_a, n_b


def _residual_arrays(fp: FieldPair, params: FunctionalParams):
    _check_params(fp, params)
    d1, d2 = d1_matrix(fp.grid), d2_matrix(fp.grid)
    q, r = fp.q.values, fp.r.values
    n, n_a, n_b = _first_order(d1 @ q, d1 @ r, params)
    return d2 @ q + n, d2 @ r + n, n_a, n_b


def residual_L1(fp: FieldPair, params: FunctionalParams) -> Field:
    l1, _, _, _ = _residual_arrays(fp, params)
    return fp.q.with_values(l1)


def residual_L2(fp: FieldPair, params: FunctionalParams) -> Field:
    _, l2, _, _ = _residual_arrays(fp, params)
    return fp.q.with_values(l2)


def residual_split(fp: FieldPair, params: FunctionalParams) -> ResidualSplit:
    l1, l2, _, _ = _residual_arrays(fp, params)
    return ResidualSplit(
        L1=fp.q.with_values(l1),
        L2=fp.q.with_values(l2),
        viscosity=fp.q.with_values(d2_matrix(fp.grid) @ (fp.r.values - fp.q.values)),
    )


def _weights(grid: Grid1D, lam: float) -> np.ndarray:
    return trapezoid_weights(grid) * cwf(grid.nodes, lam)


def carleman_norm_sq(u: Field, lam: float) -> float:
    """``int phi (u_zz^2 + lam u_z^2 + lam^3 u^2) dz``."""
    grid = u.grid
    slopes = d1_matrix(grid) @ u.values
    second = d2_matrix(grid) @ u.values
    return float(_weights(grid, lam) @ (second**2 + lam * slopes**2 + lam**3 * u.values**2))


def evaluate_J(fp: FieldPair, params: FunctionalParams) -> float:
    l1, l2, _, _ = _residual_arrays(fp, params)
    return float(_weights(fp.grid, params.lam) @ (l1**2 + l2**2))


def euclidean_gradient(fp: FieldPair, params: FunctionalParams) -> tuple[np.ndarray, np.ndarray]:
    """Derivative of the discrete ``J`` with respect to the nodal values of q and r."""
    l1, l2, n_a, n_b = _residual_arrays(fp, params)
    grid = fp.grid
    d1, d2 = d1_matrix(grid), d2_matrix(grid)
    weighted_1 = _weights(grid, params.lam) * l1
    weighted_2 = _weights(grid, params.lam) * l2
    shared = weighted_1 + weighted_2
    grad_q = 2.0 * (d2.T @ weighted_1 + d1.T @ (n_a * shared))
    grad_r = 2.0 * (d2.T @ weighted_2 + d1.T @ (n_b * shared))
    return grad_q, grad_r


def gradient_J(fp: FieldPair, params: FunctionalParams, representation: str = "h2") -> FieldPair:
    """Riesz representative of ``J'`` in the constrained space.

    Args:
        fp: Point at which the derivative is taken
        params: Functional parameters for the pair's frequency
        representation: ``"h2"`` (default) or the ``"l2"`` diagnostic metric

    Returns:
        FieldPair whose components vanish with their slope at 0 and have zero
        slope at Z
    """
    if representation not in REPRESENTATIONS:
        raise InvalidArgumentError(
            f"unknown representation {representation!r}, expected one of {REPRESENTATIONS}"
        )
    grad_q, grad_r = euclidean_gradient(fp, params)
    return fp.with_arrays(
        riesz_from_load(grad_q, fp.grid, representation),
        riesz_from_load(grad_r, fp.grid, representation),
    )


def pair_inner(a: FieldPair, b: FieldPair, metric: str = "h2") -> float:
    gram = gram_matrix(a.grid, metric)
    return float(a.q.values @ (gram @ b.q.values) + a.r.values @ (gram @ b.r.values))


def gradient_norm(grad: FieldPair) -> float:
    return float(np.hypot(h2_norm(grad.q), h2_norm(grad.r)))


def directional_derivative(
    fp: FieldPair, direction: FieldPair, params: FunctionalParams, representation: str = "h2"
) -> float:
    """``<J'(fp), direction>`` in the metric of ``representation``."""
    return pair_inner(gradient_J(fp, params, representation), direction, representation)


def _check_same_boundary(fp1: FieldPair, fp2: FieldPair) -> None:
    t1, t2 = pair_traces(fp1), pair_traces(fp2)
    scale = max(1.0, float(np.max(np.abs(t1))))
    if np.max(np.abs(t1 - t2)) > TRACE_TOL * scale:
        raise InvalidArgumentError(
            f"pairs do not share boundary data, trace difference {np.max(np.abs(t1 - t2)):.3e}"
        )


def convexity_gap(
    fp1: FieldPair, fp2: FieldPair, params: FunctionalParams
) -> tuple[float, float]:
    """Return ``(J(fp2) - J(fp1) - <J'(fp1), fp2 - fp1>, exp(-2 lambda Z) ||fp2 - fp1||^2)``."""
    _check_same_boundary(fp1, fp2)
    diff = fp2 - fp1
    gap = evaluate_J(fp2, params) - evaluate_J(fp1, params) - directional_derivative(fp1, diff, params)
    scaled_distance = cwf(fp1.grid.z_max, params.lam) * (h2_norm(diff.q) ** 2 + h2_norm(diff.r) ** 2)
    return float(gap), float(scaled_distance)


def carleman_check(u: Field, lam: float) -> CarlemanTerms:
    """Weighted integrals entering the Carleman estimate for a constrained ``u``."""
    grid = u.grid
    values = u.values
    slopes = d1_matrix(grid) @ values
    scale = max(1.0, float(np.max(np.abs(values))))
    if abs(values[0]) > TRACE_TOL * scale or abs(slopes[0]) * grid.spacing > TRACE_TOL * scale:
        raise InvalidArgumentError(
            f"u must vanish with its slope at z=0, got u(0)={values[0]:.3e}, u'(0)={slopes[0]:.3e}"
        )
    weights = _weights(grid, lam)
    second = d2_matrix(grid) @ values
    d2_term = float(weights @ second**2)
    lower_term = float(lam * (weights @ (slopes**2 + lam**2 * values**2)))
    return CarlemanTerms(lhs=d2_term, d2_term=d2_term, lower_term=lower_term)
