"""Conductivity profiles sigma(z) and the factory for the named analytic ones."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from core.exceptions import DataSourceError, InvalidArgumentError
from core.grid import Field, Grid1D

logger = logging.getLogger(__name__)

PROFILE_TOL = 1e-12


@dataclass(frozen=True)
class ConductivityProfile:
    """Nodal samples of sigma with sigma >= 1 and sigma = 1 at both ends."""

    values: Field
    name: str = "custom"

    def __post_init__(self):
        sigma = self.values.values
        if np.any(sigma < 1.0 - PROFILE_TOL):
            raise InvalidArgumentError(
                f"profile {self.name!r} has sigma < 1 (min {sigma.min():.6g})"
            )
        if abs(sigma[0] - 1.0) > PROFILE_TOL or abs(sigma[-1] - 1.0) > PROFILE_TOL:
            raise InvalidArgumentError(
                f"profile {self.name!r} must equal 1 at both ends, "
                f"got sigma(0)={sigma[0]:.6g}, sigma(Z)={sigma[-1]:.6g}"
            )

    @property
    def grid(self) -> Grid1D:
        return self.values.grid


def taper(z: np.ndarray, z_max: float, width: float = 0.1) -> np.ndarray:
    """Smooth factor that vanishes with its slope at ``0`` and ``z_max``."""
    tau = width * z_max
    return (1.0 - np.exp(-((z / tau) ** 2))) * (1.0 - np.exp(-(((z_max - z) / tau) ** 2)))


def flat_profile(grid: Grid1D) -> ConductivityProfile:
    return ConductivityProfile(Field.constant(grid, 1.0), name="flat")


def bump_profile(
    grid: Grid1D, amplitude: float = 0.5, center: float | None = None, width: float = 0.2
) -> ConductivityProfile:
    """``1 + a * exp(-(z - c)^2 / s^2)`` tapered to 1 at the endpoints."""
    if amplitude < 0 or width <= 0:
        raise InvalidArgumentError(f"bump needs amplitude >= 0 and width > 0, got {amplitude}, {width}")
    z, z_max = grid.nodes, grid.z_max
    c = 0.5 * z_max if center is None else center
    bump = amplitude * np.exp(-(((z - c) / width) ** 2)) * taper(z, z_max)
    return ConductivityProfile(Field(1.0 + bump, grid), name="bump")


def two_layer_profile(
    grid: Grid1D, amplitude: float = 0.5, center: float | None = None, width: float = 0.05
) -> ConductivityProfile:
    """Smoothed step from 1 to ``1 + amplitude`` at ``center``, tapered at the ends."""
    if amplitude < 0 or width <= 0:
        raise InvalidArgumentError(f"step needs amplitude >= 0 and width > 0, got {amplitude}, {width}")
    z, z_max = grid.nodes, grid.z_max
    c = 0.5 * z_max if center is None else center
    step = 0.5 * amplitude * (1.0 + np.tanh((z - c) / width)) * taper(z, z_max)
    return ConductivityProfile(Field(1.0 + step, grid), name="two-layer-smooth")


def load_profile(path: str | Path, grid: Grid1D) -> ConductivityProfile:
    """Read a two-column ``z sigma`` table and interpolate it onto *grid*."""
    try:
        table = np.loadtxt(path, comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataSourceError(f"Error reading profile table {path}: {exc}") from exc
    if table.shape[1] != 2:
        raise DataSourceError(f"profile table {path} needs 2 columns, got {table.shape[1]}")
    z, sigma = table[:, 0], table[:, 1]
    if np.any(np.diff(z) <= 0):
        raise DataSourceError(f"profile table {path} needs strictly increasing z")
    values = np.interp(grid.nodes, z, sigma, left=1.0, right=1.0)
    return ConductivityProfile(Field(values, grid), name=Path(path).stem)


class ProfileFactory:
    """Factory for creating a profile from its configured name."""

    NAMES = ("flat", "bump", "two-layer-smooth", "file")

    @staticmethod
    def create_profile(name: str, grid: Grid1D, **params) -> ConductivityProfile:
        """
        Create the named analytic profile on *grid*.

        Args:
            name: One of ``ProfileFactory.NAMES``
            grid: Depth grid to sample on
            **params: amplitude/center/width, or ``path`` for ``file``

        Raises:
            InvalidArgumentError: If the name is unknown
        """
        if name == "flat":
            return flat_profile(grid)
        if name == "bump":
            return bump_profile(grid, **params)
        if name == "two-layer-smooth":
            return two_layer_profile(grid, **params)
        if name == "file":
            return load_profile(params["path"], grid)
        raise InvalidArgumentError(f"Cannot determine profile for name: {name}")
