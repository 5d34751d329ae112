"""Monte-Carlo checks of the Carleman estimate, strong convexity and the gradient.

Carleman and gradient samples draw from their own generator seeded with
``[seed, index]``. Convexity pairs come from one Latin-hypercube design per
seed, built before the per-lambda fan-out. Either way the results do not
depend on the number of worker threads.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import norm, qmc

from core.exceptions import InfeasibleConstraintError, InvalidArgumentError
from core.functional.carleman import (
    FunctionalParams,
    carleman_check,
    carleman_norm_sq,
    convexity_gap,
    directional_derivative,
    evaluate_J,
)
from core.grid import Field, Grid1D, constrained_basis, h2_norm
from core.transform import FieldPair, LiftPair
from core.workers import parallel_map

logger = logging.getLogger(__name__)

DEFAULT_MODES = 8


def constrained_field(grid: Grid1D, amplitudes: np.ndarray) -> Field:
    """Unit-H² field ``sum a_j (1 - cos(j pi z / Z))`` snapped onto the constrained space.

    The result has zero value and slope at 0 and zero slope at Z.
    """
    z = grid.nodes
    modes = np.arange(1, len(amplitudes) + 1)
    raw = (1.0 - np.cos(np.outer(z, modes) * np.pi / grid.z_max)) @ amplitudes
    values = constrained_basis(grid) @ raw[2:-1]
    u = Field(values, grid)
    size = h2_norm(u)
    if size == 0.0:
        return u
    return u * (1.0 / size)


def random_constrained_field(grid: Grid1D, rng: np.random.Generator, n_modes: int = DEFAULT_MODES) -> Field:
    """Random ``constrained_field`` with amplitudes ``N(0, 1) / j^2``."""
    modes = np.arange(1, n_modes + 1)
    return constrained_field(grid, rng.standard_normal(n_modes) / modes**2)


def _budget(lift: LiftPair, R: float) -> float:
    budget = R - lift.norm_sum()
    if budget <= 0:
        raise InfeasibleConstraintError(
            f"lift norm {lift.norm_sum():.6g} already exceeds the ball radius R={R}"
        )
    return budget


def random_pair_in_ball(
    lift: LiftPair, R: float, k: float, epsilon: float, rng: np.random.Generator
) -> FieldPair:
    """Random pair carrying the lift's boundary data with ``||q|| + ||r|| <= R``."""
    budget = _budget(lift, R)
    grid = lift.F1.grid
    t_q, t_r = 0.5 * budget * rng.uniform(0.0, 1.0, size=2)
    return FieldPair(
        lift.F1 + t_q * random_constrained_field(grid, rng),
        lift.F2 + t_r * random_constrained_field(grid, rng),
        k,
        epsilon,
    )


def stratified_pairs(
    lift: LiftPair,
    R: float,
    k: float,
    epsilon: float,
    samples: int,
    seed: int,
    n_modes: int = DEFAULT_MODES,
) -> list[tuple[FieldPair, FieldPair]]:
    """Pairs of points in B(R) drawn like ``random_pair_in_ball`` from a Latin-hypercube design.

    Each point uses two radius fractions and ``2 * n_modes`` mode amplitudes, so a
    pair spans ``4 * (n_modes + 1)`` design columns. Stratifying every column keeps
    the spread of radii and amplitudes nearly the same from one seed to the next.
    """
    budget = _budget(lift, R)
    grid = lift.F1.grid
    per_point = 2 * (n_modes + 1)
    design = qmc.LatinHypercube(d=2 * per_point, seed=np.random.default_rng(seed)).random(samples)
    scale = 1.0 / np.arange(1, n_modes + 1) ** 2

    def point(u: np.ndarray) -> FieldPair:
        t_q, t_r = 0.5 * budget * u[:2]
        a_q, a_r = norm.ppf(u[2:]).reshape(2, n_modes) * scale
        return FieldPair(
            lift.F1 + t_q * constrained_field(grid, a_q),
            lift.F2 + t_r * constrained_field(grid, a_r),
            k,
            epsilon,
        )

    return [(point(row[:per_point]), point(row[per_point:])) for row in design]


def fit_carleman_constants(
    grid: Grid1D,
    lambdas: Sequence[float],
    samples: int,
    seed: int,
    max_workers: int | None = None,
) -> tuple[dict[float, float], np.ndarray]:
    """Fitted ``C0(lambda) = min lhs / (d2_term + lower_term)`` over random fields.

    Returns the constants and a table ``lambda, sample, lhs, d2_term, lower_term, ratio``.
    """
    if samples < 1:
        raise InvalidArgumentError(f"samples must be >= 1, got {samples}")

    def run(lam: float) -> np.ndarray:
        rows = []
        for i in range(samples):
            u = random_constrained_field(grid, np.random.default_rng([seed, i]))
            terms = carleman_check(u, lam)
            rows.append((lam, i, terms.lhs, terms.d2_term, terms.lower_term, terms.ratio))
        return np.array(rows)

    tables = parallel_map(run, lambdas, max_workers)
    constants = {float(lam): float(np.min(t[:, 5])) for lam, t in zip(lambdas, tables)}
    for lam, c0 in constants.items():
        logger.info("carleman fit lambda=%g C0=%.6g samples=%d", lam, c0, samples)
    return constants, np.vstack(tables)


@dataclass(frozen=True)
class ConvexityFit:
    """Convexity constants at one lambda.

    ``C1`` is the median of ``gap / carleman_distance``, the weighted form the
    Carleman estimate bounds from below. ``C1_min`` is the worst sampled
    ``gap / scaled_distance`` in the ``exp(-2 lambda Z) ||.||_H2^2`` form.
    """

    lam: float
    C1: float
    C1_min: float
    min_gap: float
    n_positive: int
    samples: int

    @property
    def all_positive(self) -> bool:
        return self.n_positive == self.samples


def fit_convexity_constants(
    lift: LiftPair,
    k: float,
    epsilon: float,
    R: float,
    lambdas: Sequence[float],
    samples: int,
    seed: int,
    max_workers: int | None = None,
) -> tuple[list[ConvexityFit], np.ndarray]:
    """Sample same-boundary pairs in B(R) and fit the convexity constants per lambda.

    The same pairs serve every lambda. Returns the fits and a table
    ``lambda, sample, gap, scaled_distance, carleman_distance``.
    """
    if samples < 1:
        raise InvalidArgumentError(f"samples must be >= 1, got {samples}")
    pairs = stratified_pairs(lift, R, k, epsilon, samples, seed)

    def run(lam: float) -> np.ndarray:
        params = FunctionalParams(lam=lam, epsilon=epsilon, k=k, R=R)
        rows = []
        for i, (fp1, fp2) in enumerate(pairs):
            gap, distance = convexity_gap(fp1, fp2, params)
            diff = fp2 - fp1
            weighted = carleman_norm_sq(diff.q, lam) + carleman_norm_sq(diff.r, lam)
            rows.append((lam, i, gap, distance, weighted))
        return np.array(rows)

    tables = parallel_map(run, lambdas, max_workers)
    fits = []
    for lam, table in zip(lambdas, tables):
        gaps, distances, weighted = table[:, 2], table[:, 3], table[:, 4]
        fit = ConvexityFit(
            lam=float(lam),
            C1=float(np.median(gaps / weighted)),
            C1_min=float(np.min(gaps / distances)),
            min_gap=float(np.min(gaps)),
            n_positive=int(np.count_nonzero(gaps > 0)),
            samples=samples,
        )
        logger.info(
            "convexity fit lambda=%g C1=%.6g C1_min=%.6g min_gap=%.6g positive=%d/%d",
            fit.lam, fit.C1, fit.C1_min, fit.min_gap, fit.n_positive, samples,
        )
        fits.append(fit)
    return fits, np.vstack(tables)


def gradient_check(
    fp: FieldPair,
    params: FunctionalParams,
    rng: np.random.Generator,
    n_directions: int = 10,
    t: float = 1e-5,
    representation: str = "h2",
) -> np.ndarray:
    """Compare ``<J', h>`` with central differences of J along random constrained directions.

    Returns rows ``direction, analytic, finite_difference, relative_error``.
    """
    grid = fp.grid
    rows = []
    for i in range(n_directions):
        h = FieldPair(
            random_constrained_field(grid, rng), random_constrained_field(grid, rng),
            fp.k, fp.epsilon,
        )
        plus = FieldPair(fp.q + t * h.q, fp.r + t * h.r, fp.k, fp.epsilon)
        minus = FieldPair(fp.q - t * h.q, fp.r - t * h.r, fp.k, fp.epsilon)
        fd = (evaluate_J(plus, params) - evaluate_J(minus, params)) / (2.0 * t)
        analytic = directional_derivative(fp, h, params, representation)
        scale = max(abs(fd), abs(analytic), np.finfo(float).tiny)
        rows.append((i, analytic, fd, abs(analytic - fd) / scale))
    return np.array(rows)


@dataclass
class VerifyReport:
    lambda_tested: list[float]
    carleman_C0: dict[float, float]
    convexity_C1: dict[float, float]
    min_gap: float
    samples: int
    convexity_C1_min: dict[float, float] = field(default_factory=dict)
    positive_gaps: dict[float, int] = field(default_factory=dict)
    empirical_lambda1: float | None = None
    gradient_max_rel_error: float = float("nan")
    carleman_table: np.ndarray | None = None
    convexity_table: np.ndarray | None = None
    gradient_table: np.ndarray | None = None

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidArgumentError(f"samples must be >= 1, got {self.samples}")

    def to_dict(self) -> dict:
        """JSON-ready summary; keys of the per-lambda maps become strings."""
        return {
            "lambda_tested": [float(lam) for lam in self.lambda_tested],
            "carleman_C0": {repr(float(lam)): c for lam, c in self.carleman_C0.items()},
            "convexity_C1": {repr(float(lam)): c for lam, c in self.convexity_C1.items()},
            "convexity_C1_min": {repr(float(lam)): c for lam, c in self.convexity_C1_min.items()},
            "positive_gaps": {repr(float(lam)): n for lam, n in self.positive_gaps.items()},
            "min_gap": self.min_gap,
            "samples": self.samples,
            "empirical_lambda1": self.empirical_lambda1,
            "gradient_max_rel_error": self.gradient_max_rel_error,
        }


def run_verification(
    lift: LiftPair,
    k: float,
    epsilon: float,
    R: float,
    lambdas: Sequence[float],
    carleman_lambdas: Sequence[float],
    samples: int,
    seed: int,
    gradient_points: int = 10,
    max_workers: int | None = None,
) -> VerifyReport:
    """Run the Carleman, convexity and gradient suites for one frequency."""
    if not lambdas:
        raise InvalidArgumentError("need at least one lambda to verify")
    grid = lift.F1.grid
    lambdas = sorted(float(lam) for lam in lambdas)

    c0, carleman_table = fit_carleman_constants(grid, carleman_lambdas, samples, seed, max_workers)
    fits, convexity_table = fit_convexity_constants(
        lift, k, epsilon, R, lambdas, samples, seed, max_workers
    )

    params = FunctionalParams(lam=lambdas[0], epsilon=epsilon, k=k, R=R)
    gradient_rows = []
    for point in range(gradient_points):
        rng = np.random.default_rng([seed, samples + point])
        fp = random_pair_in_ball(lift, R, k, epsilon, rng)
        rows = gradient_check(fp, params, rng)
        gradient_rows.append(np.column_stack([np.full(len(rows), point), rows]))
    gradient_table = np.vstack(gradient_rows) if gradient_rows else np.empty((0, 5))
    max_rel = float(np.max(gradient_table[:, 4])) if len(gradient_table) else float("nan")

    lambda1 = next((fit.lam for fit in fits if fit.all_positive), None)
    if lambda1 is None:
        logger.warning("no tested lambda gave all-positive convexity gaps lambdas=%s", lambdas)
    logger.info("gradient check points=%d max_rel_error=%.3e", gradient_points, max_rel)

    return VerifyReport(
        lambda_tested=lambdas,
        carleman_C0=c0,
        convexity_C1={fit.lam: fit.C1 for fit in fits},
        convexity_C1_min={fit.lam: fit.C1_min for fit in fits},
        min_gap=min(fit.min_gap for fit in fits),
        samples=samples,
        positive_gaps={fit.lam: fit.n_positive for fit in fits},
        empirical_lambda1=lambda1,
        gradient_max_rel_error=max_rel,
        carleman_table=carleman_table,
        convexity_table=convexity_table,
        gradient_table=gradient_table,
    )
