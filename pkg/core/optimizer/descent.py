"""Fixed-step projected gradient descent over the ball B(R) with fixed boundary data."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from core.exceptions import InfeasibleConstraintError, InvalidArgumentError, StepSizeError
from core.functional import FunctionalParams, evaluate_J, gradient_J, gradient_norm
from core.transform import FieldPair, LiftPair, pair_distance

logger = logging.getLogger(__name__)

DIVERGENCE_WINDOW = 5
MAX_STORED_ITERATES = 1000
MIN_THETA_POINTS = 5
FLOOR_FACTOR = 10.0


@dataclass(frozen=True)
class DescentConfig:
    gamma: float
    max_iters: int
    grad_tol: float
    R: float
    lam: float
    epsilon: float
    k: float
    representation: str = "h2"
    snapshot_every: int = 0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise InvalidArgumentError(f"step size gamma must lie in (0, 1), got {self.gamma}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidArgumentError(f"max_iters must be an integer >= 1, got {self.max_iters}")
        if not self.grad_tol > 0:
            raise InvalidArgumentError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.snapshot_every < 0:
            raise InvalidArgumentError(f"snapshot_every must be >= 0, got {self.snapshot_every}")

    @property
    def params(self) -> FunctionalParams:
        return FunctionalParams(lam=self.lam, epsilon=self.epsilon, k=self.k, R=self.R)


@dataclass
class DescentHistory:
    """Per-iteration record of one descent; index 0 is the start point."""

    J_values: list[float] = field(default_factory=list)
    grad_norms: list[float] = field(default_factory=list)
    projected_flags: list[bool] = field(default_factory=list)
    errors: list[float] = field(default_factory=list)
    distance_iterations: list[int] = field(default_factory=list)
    iterates_norms: list[float] = field(default_factory=list)
    snapshots: list[tuple[int, FieldPair]] = field(default_factory=list)
    theta_hat: float | None = None
    floor_dominated: bool = False
    converged: bool = False

    @property
    def n_iters(self) -> int:
        return len(self.J_values) - 1

    def table(self, k: float) -> np.ndarray:
        """Rows ``k, iteration, J, grad_norm, error, projected``."""
        n = len(self.J_values)
        errors = self.errors if self.errors else [math.nan] * n
        return np.column_stack([
            np.full(n, k),
            np.arange(n),
            self.J_values,
            self.grad_norms,
            errors,
            np.asarray(self.projected_flags, dtype=float),
        ])


@dataclass(frozen=True)
class ThetaEstimate:
    theta: float | None
    floor_dominated: bool
    n_points: int


def _project(fp: FieldPair, lift: LiftPair, R: float) -> tuple[FieldPair, bool]:
    if fp.norm_sum() <= R:
        return fp, False
    if lift.norm_sum() > R:
        raise InfeasibleConstraintError(
            f"lift norm {lift.norm_sum():.6g} exceeds the ball radius R={R}"
        )
    hq, hr = fp.q - lift.F1, fp.r - lift.F2

    def scaled(s: float) -> FieldPair:
        return FieldPair(lift.F1 + s * hq, lift.F2 + s * hr, fp.k, fp.epsilon)

    s = brentq(lambda s: scaled(s).norm_sum() - R, 0.0, 1.0, xtol=1e-12)
    projected = scaled(s)
    while projected.norm_sum() > R:
        s *= 1.0 - 1e-12
        projected = scaled(s)
    return projected, True


def project_to_ball(fp: FieldPair, lift: LiftPair, R: float) -> FieldPair:
    """Radially scale the part of *fp* above the lift until ``||q|| + ||r|| <= R``.

    Raises:
        InfeasibleConstraintError: If the lift alone lies outside the ball
    """
    projected, _ = _project(fp, lift, R)
    return projected


def _step(fp: FieldPair, grad: FieldPair, cfg: DescentConfig, lift: LiftPair) -> tuple[FieldPair, bool]:
    moved = FieldPair(fp.q - cfg.gamma * grad.q, fp.r - cfg.gamma * grad.r, fp.k, fp.epsilon)
    return _project(moved, lift, cfg.R)


def gd_step(fp: FieldPair, cfg: DescentConfig, lift: LiftPair) -> FieldPair:
    grad = gradient_J(fp, cfg.params, cfg.representation)
    stepped, _ = _step(fp, grad, cfg, lift)
    return stepped


def _stride(max_iters: int) -> int:
    return max(1, math.ceil(max_iters / MAX_STORED_ITERATES))


def minimize(
    start: FieldPair,
    cfg: DescentConfig,
    lift: LiftPair,
    reference: FieldPair | None = None,
) -> tuple[FieldPair, DescentHistory]:
    """Iterate ``gd_step`` until the gradient norm drops below ``grad_tol`` or ``max_iters``.

    Args:
        start: Initial pair carrying the lift's boundary data
        cfg: Frozen step size and functional parameters
        lift: Boundary lift fixing the data of every iterate
        reference: Optional true pair; distances to it are recorded per iteration

    Returns:
        The final pair and its history with ``theta_hat`` fitted

    Raises:
        StepSizeError: If J increases for several consecutive iterations
    """
    params = cfg.params
    if start.norm_sum() > cfg.R / 3.0:
        logger.warning(
            "start point outside B(R/3) k=%g norm_sum=%.6g R=%g", cfg.k, start.norm_sum(), cfg.R
        )
    fp, projected = _project(start, lift, cfg.R)
    if projected:
        logger.warning("start point projected onto B(R) k=%g", cfg.k)

    history = DescentHistory()
    stride = _stride(cfg.max_iters)
    stored: list[FieldPair] = [fp]
    history.distance_iterations.append(0)

    J = evaluate_J(fp, params)
    history.J_values.append(J)
    history.projected_flags.append(projected)
    if reference is not None:
        history.errors.append(pair_distance(fp, reference))
    if cfg.snapshot_every:
        history.snapshots.append((0, fp))

    increases = 0
    iteration = 0
    while True:
        grad = gradient_J(fp, params, cfg.representation)
        history.grad_norms.append(gradient_norm(grad))
        if history.grad_norms[-1] <= cfg.grad_tol:
            history.converged = True
            break
        if iteration == cfg.max_iters:
            break

        fp, projected = _step(fp, grad, cfg, lift)
        iteration += 1
        if projected:
            logger.info("projection active k=%g iteration=%d", cfg.k, iteration)

        J_new = evaluate_J(fp, params)
        increases = increases + 1 if J_new > J else 0
        if increases >= DIVERGENCE_WINDOW:
            raise StepSizeError(
                f"J increased for {DIVERGENCE_WINDOW} consecutive iterations at k={cfg.k} "
                f"with gamma={cfg.gamma}; use a smaller step size"
            )
        J = J_new

        history.J_values.append(J)
        history.projected_flags.append(projected)
        if reference is not None:
            history.errors.append(pair_distance(fp, reference))
        if iteration % stride == 0:
            stored.append(fp)
            history.distance_iterations.append(iteration)
        if cfg.snapshot_every and iteration % cfg.snapshot_every == 0:
            history.snapshots.append((iteration, fp))

    if history.distance_iterations[-1] != iteration:
        stored.append(fp)
        history.distance_iterations.append(iteration)
    if cfg.snapshot_every and history.snapshots[-1][0] != iteration:
        history.snapshots.append((iteration, fp))
    history.iterates_norms = [pair_distance(x, fp) for x in stored]

    try:
        estimate = estimate_theta(history)
        history.theta_hat, history.floor_dominated = estimate.theta, estimate.floor_dominated
    except InvalidArgumentError:
        logger.debug("history too short to fit theta k=%g iterations=%d", cfg.k, iteration)

    logger.info(
        "descent finished k=%g iterations=%d J0=%.6g J=%.6g grad_norm=%.3e theta=%s converged=%s",
        cfg.k, iteration, history.J_values[0], J, history.grad_norms[-1],
        "n/a" if history.theta_hat is None else f"{history.theta_hat:.6f}", history.converged,
    )
    return fp, history


def estimate_theta(h: DescentHistory) -> ThetaEstimate:
    """Contraction factor per iteration from the geometric phase of the distance-to-final record.

    The geometric phase is every stored distance more than ten times the
    smallest positive one; with fewer than five such points the history is
    reported as floor-dominated and no factor is returned.
    """
    distances = np.asarray(h.iterates_norms, dtype=float)
    iterations = np.asarray(h.distance_iterations, dtype=float)
    if iterations.shape != distances.shape:
        iterations = np.arange(len(distances), dtype=float)
    positive = distances > 0
    if np.count_nonzero(positive) < MIN_THETA_POINTS:
        raise InvalidArgumentError(
            f"need at least {MIN_THETA_POINTS} positive distances to fit theta, "
            f"got {np.count_nonzero(positive)}"
        )
    distances, iterations = distances[positive], iterations[positive]
    phase = distances > FLOOR_FACTOR * distances.min()
    if np.count_nonzero(phase) < MIN_THETA_POINTS:
        return ThetaEstimate(theta=None, floor_dominated=True, n_points=int(np.count_nonzero(phase)))
    slope, _ = np.polyfit(iterations[phase], np.log(distances[phase]), 1)
    return ThetaEstimate(theta=float(np.exp(slope)), floor_dominated=False, n_points=int(np.count_nonzero(phase)))


def probe_step_size(
    start: FieldPair,
    cfg: DescentConfig,
    lift: LiftPair,
    initial: float = 0.25,
    probe_iters: int = 20,
    safety: float = 0.5,
    min_gamma: float = 1e-12,
) -> float:
    """Find a frozen step size by halving, then doubling, short probe runs.

    A step size passes when ``probe_iters`` steps from *start* never increase J.
    The returned value is ``safety`` times the largest passing step found.
    """
    params = cfg.params

    def passes(gamma: float) -> bool:
        trial = replace(cfg, gamma=gamma)
        fp = project_to_ball(start, lift, cfg.R)
        J = evaluate_J(fp, params)
        for _ in range(probe_iters):
            fp = gd_step(fp, trial, lift)
            J_new = evaluate_J(fp, params)
            if not np.isfinite(J_new) or J_new > J:
                return False
            J = J_new
        return True

    gamma = initial
    halved = False
    while not passes(gamma):
        gamma *= 0.5
        halved = True
        if gamma < min_gamma:
            raise StepSizeError(f"no stable step size above {min_gamma} at k={cfg.k}")
    while not halved and 2.0 * gamma < 1.0 and passes(2.0 * gamma):
        gamma *= 2.0
    gamma *= safety
    logger.info("frozen step size k=%g gamma=%.6g", cfg.k, gamma)
    return gamma
