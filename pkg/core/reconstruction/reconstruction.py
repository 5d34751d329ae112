"""From minimizers back to the conductivity, plus the error reports of synthetic runs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from core.exceptions import InvalidArgumentError
from core.forward import ConductivityProfile
from core.functional import FunctionalParams
from core.grid import Field, KGrid, d1_matrix, d2_matrix, require_same_grid, trapezoid_weights
from core.optimizer import DescentHistory
from core.transform import FieldPair, pair_distance

logger = logging.getLogger(__name__)

BELOW_ONE_TOL = 1e-12


def recover_p(fp: FieldPair) -> Field:
    """``p = (q - r) / eps``."""
    return (fp.q - fp.r) * (1.0 / fp.epsilon)


def sigma_of_k(p: Field, k: float) -> Field:
    """``sigma = p_zz + k p_z^2 - 2 sqrt(k) p_z + 1``."""
    if not k > 0:
        raise InvalidArgumentError(f"frequency k must be positive, got {k}")
    slope = d1_matrix(p.grid) @ p.values
    curvature = d2_matrix(p.grid) @ p.values
    return p.with_values(curvature + k * slope**2 - 2.0 * np.sqrt(k) * slope + 1.0)


def sigma_average(family: Sequence[Field], kg: KGrid) -> Field:
    """Trapezoidal mean of the family over ``[k_min, k_max]``, nodewise in z."""
    if len(family) != kg.n_k:
        raise InvalidArgumentError(f"family has {len(family)} members, k-grid has {kg.n_k}")
    require_same_grid(*family)
    stacked = np.stack([f.values for f in family])
    integral = trapezoid(stacked, kg.values, axis=0)
    return family[0].with_values(integral / (kg.k_max - kg.k_min))


def sigma_spread(family: Sequence[Field]) -> Field:
    """Nodewise ``max - min`` across the family; large values flag k-inconsistency."""
    stacked = np.stack([f.values for f in family])
    return family[0].with_values(stacked.max(axis=0) - stacked.min(axis=0))


def below_one(sigma: Field) -> np.ndarray:
    return sigma.values < 1.0 - BELOW_ONE_TOL


@dataclass
class InversionResult:
    sigma_comp: Field
    sigma_per_k: list[Field]
    minimizers: list[FieldPair]
    histories: list[DescentHistory]
    params: list[FunctionalParams]
    data_noise: float
    k_grid: KGrid

    def __post_init__(self):
        n_k = self.k_grid.n_k
        for name in ("sigma_per_k", "minimizers", "histories", "params"):
            if len(getattr(self, name)) != n_k:
                raise InvalidArgumentError(f"{name} has {len(getattr(self, name))} members, need {n_k}")
        for fp, p in zip(self.minimizers, self.params):
            if fp.k != p.k:
                raise InvalidArgumentError(f"params for k={p.k} paired with a minimizer at k={fp.k}")
        require_same_grid(self.sigma_comp, *self.sigma_per_k)

    @property
    def spread(self) -> Field:
        return sigma_spread(self.sigma_per_k)


def assemble_result(
    minimizers: Sequence[FieldPair],
    histories: Sequence[DescentHistory],
    kg: KGrid,
    params: Sequence[FunctionalParams],
    data_noise: float,
) -> InversionResult:
    """Per-k sigma, their k-average and the result record; *params* holds one entry per frequency."""
    sigma_per_k = [sigma_of_k(recover_p(fp), fp.k) for fp in minimizers]
    sigma_comp = sigma_average(sigma_per_k, kg)
    flagged = int(np.count_nonzero(below_one(sigma_comp)))
    if flagged:
        logger.warning("reconstructed sigma < 1 at %d nodes, min=%.6g", flagged, sigma_comp.values.min())
    result = InversionResult(
        sigma_comp=sigma_comp,
        sigma_per_k=sigma_per_k,
        minimizers=list(minimizers),
        histories=list(histories),
        params=list(params),
        data_noise=data_noise,
        k_grid=kg,
    )
    logger.info("sigma assembled n_k=%d max_spread=%.6g", kg.n_k, float(result.spread.values.max()))
    return result


def l2_norm(f: Field) -> float:
    return float(np.sqrt(trapezoid_weights(f.grid) @ f.values**2))


@dataclass
class ErrorReport:
    pair_errors: list[float]
    sigma_l2_error: float
    sigma_rel_error: float
    below_one_nodes: int
    max_spread: float
    theta_hat: list[float | None]
    envelope_ok: list[bool]
    lift_distances: list[float] = field(default_factory=list)
    sigma_error_curve: list[tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "pair_errors_h2": self.pair_errors,
            "sigma_l2_error": self.sigma_l2_error,
            "sigma_rel_error": self.sigma_rel_error,
            "below_one_nodes": self.below_one_nodes,
            "max_spread": self.max_spread,
            "theta_hat": self.theta_hat,
            "envelope_ok": self.envelope_ok,
            "lift_distances": self.lift_distances,
            "sigma_error_curve": [[n, e] for n, e in self.sigma_error_curve],
        }


def _envelope_ok(history: DescentHistory, tolerance: float = 0.05) -> bool:
    """``error(n) <= floor + theta^n error(0) (1 + tolerance)`` along the recorded errors."""
    if not history.errors or history.theta_hat is None:
        return True
    errors = np.asarray(history.errors)
    n = np.arange(len(errors))
    bound = (errors.min() + history.theta_hat**n * errors[0]) * (1.0 + tolerance)
    return bool(np.all(errors <= bound))


def _snapshot_at(history: DescentHistory, n: int) -> FieldPair:
    """Latest snapshot taken at or before iteration *n*."""
    chosen = history.snapshots[0][1]
    for iteration, fp in history.snapshots:
        if iteration > n:
            break
        chosen = fp
    return chosen


def sigma_error_curve(
    histories: Sequence[DescentHistory], kg: KGrid, truth: ConductivityProfile
) -> list[tuple[int, float]]:
    """L2 error of the k-averaged sigma rebuilt from the iterate snapshots.

    Runs that stopped early contribute their final iterate at later iterations.
    """
    if not histories or not all(h.snapshots for h in histories):
        return []
    iterations = sorted({n for h in histories for n, _ in h.snapshots})
    curve = []
    for n in iterations:
        pairs = [_snapshot_at(h, n) for h in histories]
        sigma = sigma_average([sigma_of_k(recover_p(fp), fp.k) for fp in pairs], kg)
        curve.append((n, l2_norm(sigma - truth.values)))
    return curve


def error_metrics(
    result: InversionResult,
    truth: ConductivityProfile,
    q_true: Sequence[Field],
    r_true: Sequence[Field],
) -> ErrorReport:
    require_same_grid(result.sigma_comp, truth.values, *q_true, *r_true)
    if len(q_true) != len(result.minimizers) or len(r_true) != len(result.minimizers):
        raise InvalidArgumentError("true fields must have one member per frequency")
    pair_errors = [
        pair_distance(fp, FieldPair(q, r, fp.k, fp.epsilon))
        for fp, q, r in zip(result.minimizers, q_true, r_true)
    ]
    sigma_error = l2_norm(result.sigma_comp - truth.values)
    truth_norm = l2_norm(truth.values)
    report = ErrorReport(
        pair_errors=pair_errors,
        sigma_l2_error=sigma_error,
        sigma_rel_error=sigma_error / truth_norm,
        below_one_nodes=int(np.count_nonzero(below_one(result.sigma_comp))),
        max_spread=float(result.spread.values.max()),
        theta_hat=[h.theta_hat for h in result.histories],
        envelope_ok=[_envelope_ok(h) for h in result.histories],
        sigma_error_curve=sigma_error_curve(result.histories, result.k_grid, truth),
    )
    logger.info(
        "errors sigma_l2=%.6g sigma_rel=%.6g max_pair_error=%.6g",
        report.sigma_l2_error, report.sigma_rel_error, max(pair_errors),
    )
    return report
