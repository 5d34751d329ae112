"""Boundary sets for (q, r) and the smooth lifts that carry them.

Two modes produce the six boundary values ``q(0), q_z(0), q_z(Z), r(0),
r_z(0), r_z(Z)`` for one frequency:

* ``paper-literal`` (alias ``closed-form``) evaluates explicit expressions
  in g and g' with their fixed constants, which assume ``p(0, k) = 1``.
* ``forward-consistent`` derives the traces from the measured pair
  ``(g, v(0, k))`` through ``p(0) = ln(2 sqrt(k) v(0)) / k`` and
  ``p_z(0) = (g / v(0) + sqrt(k)) / k``; ``p_z(Z) = 0`` because sigma = 1
  beyond ``Z``. The q-traces are k-differences of the p-traces along the
  k-grid, the same rule that turns p into q inside the domain.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from core.exceptions import InvalidArgumentError, PhysicalityError
from core.forward import DataG, k_derivative
from core.grid import Field, Grid1D, constrained_traces, h2_inner, h2_norm
from core.transform.chain import FieldPair

logger = logging.getLogger(__name__)


class BoundaryMode(str, Enum):
    PAPER_LITERAL = "paper-literal"
    FORWARD_CONSISTENT = "forward-consistent"

    @classmethod
    def _missing_(cls, value):
        return cls.PAPER_LITERAL if value == "closed-form" else None

    @classmethod
    def parse(cls, value: "BoundaryMode | str") -> "BoundaryMode":
        try:
            return cls(value)
        except ValueError as exc:
            raise InvalidArgumentError(
                f"unknown boundary mode {value!r}, expected one of {BOUNDARY_MODE_NAMES}"
            ) from exc


BOUNDARY_MODE_NAMES = ("paper-literal", "closed-form", "forward-consistent")

TRACE_NAMES = ("q0", "qz0", "qzZ", "r0", "rz0", "rzZ")


@dataclass(frozen=True)
class BoundarySet:
    q0: float
    qz0: float
    qzZ: float
    r0: float
    rz0: float
    rzZ: float
    mode: BoundaryMode
    epsilon: float = 0.0

    def __post_init__(self):
        values = self.as_array()
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError(f"boundary values must be finite: {values}")
        if self.mode is BoundaryMode.PAPER_LITERAL:
            expected = {"q0": 0.0, "qzZ": 0.0, "r0": -self.epsilon, "rzZ": 0.0}
            for name, value in expected.items():
                if getattr(self, name) != value:
                    raise InvalidArgumentError(
                        f"paper-literal boundary set needs {name}={value}, got {getattr(self, name)}"
                    )

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in TRACE_NAMES])


@dataclass(frozen=True)
class LiftPair:
    """Smooth fields carrying the q-side (F1) and r-side (F2) boundary values."""

    F1: Field
    F2: Field

    def norm_sum(self) -> float:
        return h2_norm(self.F1) + h2_norm(self.F2)

    def as_pair(self, k: float, epsilon: float) -> FieldPair:
        return FieldPair(self.F1, self.F2, k, epsilon)


def _closed_form(g: float, dg: float, k: float, epsilon: float) -> BoundarySet:
    sk = np.sqrt(k)
    qz0 = 2.0 * sk * dg + g / sk - 6.0 / k**2.5
    rz0 = 2.0 * sk * (dg - epsilon * g) + g / sk - 6.0 / k**2.5 - 4.0 * epsilon / k**1.5
    return BoundarySet(
        q0=0.0, qz0=qz0, qzZ=0.0, r0=-epsilon, rz0=rz0, rzZ=0.0,
        mode=BoundaryMode.PAPER_LITERAL, epsilon=epsilon,
    )


def _trace_series(d: DataG) -> tuple[np.ndarray, np.ndarray]:
    """``p(0, k)`` and ``p_z(0, k)`` on the whole k-grid from the measured pair (g, v0)."""
    if np.any(d.v0_values <= 0):
        raise PhysicalityError(f"trace v(0, k) must be positive, min is {d.v0_values.min():.6g}")
    k = d.k_grid.values
    sk = np.sqrt(k)
    p0 = np.log(2.0 * sk * d.v0_values) / k
    pz0 = (d.g_values / d.v0_values + sk) / k
    return p0, pz0


def _forward_consistent(d: DataG, i: int, epsilon: float) -> BoundarySet:
    p0, pz0 = _trace_series(d)
    q0 = k_derivative(p0, d.k_grid)[i]
    qz0 = k_derivative(pz0, d.k_grid)[i]
    return BoundarySet(
        q0=q0, qz0=qz0, qzZ=0.0,
        r0=q0 - epsilon * p0[i], rz0=qz0 - epsilon * pz0[i], rzZ=0.0,
        mode=BoundaryMode.FORWARD_CONSISTENT, epsilon=epsilon,
    )


def boundary_from_data(
    d: DataG, k: float, epsilon: float, mode: BoundaryMode | str = BoundaryMode.FORWARD_CONSISTENT
) -> BoundarySet:
    mode = BoundaryMode.parse(mode)
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    i = d.k_grid.index_of(k)
    k = float(d.k_grid.values[i])
    if mode is BoundaryMode.PAPER_LITERAL:
        return _closed_form(d.g_values[i], d.g_prime[i], k, epsilon)
    return _forward_consistent(d, i, epsilon)


def compare_boundary_modes(d: DataG, k: float, epsilon: float) -> dict[str, float]:
    """Per-entry difference paper-literal minus forward-consistent; disagreements are logged."""
    literal = boundary_from_data(d, k, epsilon, BoundaryMode.PAPER_LITERAL)
    consistent = boundary_from_data(d, k, epsilon, BoundaryMode.FORWARD_CONSISTENT)
    diff = dict(zip(TRACE_NAMES, literal.as_array() - consistent.as_array()))
    disagreeing = {name: value for name, value in diff.items() if abs(value) > 1e-12}
    if disagreeing:
        logger.warning(
            "boundary modes disagree k=%g epsilon=%g %s",
            k, epsilon, " ".join(f"{n}={v:.6g}" for n, v in disagreeing.items()),
        )
    return diff


def _cubic_lift(value0: float, slope0: float, slopeZ: float, grid: Grid1D) -> Field:
    z, z_max, h = grid.nodes, grid.z_max, grid.spacing
    base = Field(value0 + slope0 * z + (slopeZ - slope0) / (2.0 * z_max) * z**2, grid)
    # cubic with zero value and slope at 0 and zero slope at Z
    free = Field(z**2 - 2.0 / (3.0 * z_max) * z**3, grid)
    t = -h2_inner(base, free) / h2_inner(free, free)
    u = np.array((base + t * free).values)
    # make the one-sided stencils reproduce the slopes exactly
    u[1] = (2.0 * h * slope0 + 3.0 * u[0] + u[2]) / 4.0
    u[-1] = (2.0 * h * slopeZ + 4.0 * u[-2] - u[-3]) / 3.0
    return Field(u, grid)


def build_lift(b: BoundarySet, grid: Grid1D) -> LiftPair:
    """Minimal-H²-norm cubic lifts of the q-side and r-side boundary values."""
    return LiftPair(
        F1=_cubic_lift(b.q0, b.qz0, b.qzZ, grid),
        F2=_cubic_lift(b.r0, b.rz0, b.rzZ, grid),
    )


def lift_distance(lift: LiftPair, reference: LiftPair) -> float:
    """``||F1 - F1*||_H2 + ||F2 - F2*||_H2``, the data-noise measure of the accuracy estimate."""
    return h2_norm(lift.F1 - reference.F1) + h2_norm(lift.F2 - reference.F2)


def pair_traces(fp: FieldPair) -> np.ndarray:
    """The six boundary traces of a pair, ordered as ``TRACE_NAMES``."""
    return np.array(
        constrained_traces(fp.q.values, fp.grid) + constrained_traces(fp.r.values, fp.grid)
    )
