"""Uniform depth and frequency grids and the nodal ``Field`` carrier."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

from core.exceptions import GridMismatchError, InvalidArgumentError

MIN_NODES = 5
MIN_K_NODES = 3


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on ``[0, z_max]``."""

    z_max: float
    n_nodes: int

    def __post_init__(self):
        if not np.isfinite(self.z_max) or self.z_max <= 0:
            raise InvalidArgumentError(f"z_max must be positive, got {self.z_max}")
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < MIN_NODES:
            raise InvalidArgumentError(
                f"n_nodes must be an integer >= {MIN_NODES}, got {self.n_nodes}"
            )
        object.__setattr__(self, "n_nodes", int(self.n_nodes))

    @property
    def spacing(self) -> float:
        return self.z_max / (self.n_nodes - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = np.linspace(0.0, self.z_max, self.n_nodes)
        nodes.flags.writeable = False
        return nodes


@dataclass(frozen=True)
class KGrid:
    """Uniform frequency grid on ``[k_min, k_max]``."""

    k_min: float
    k_max: float
    n_k: int

    def __post_init__(self):
        if not (0 < self.k_min < self.k_max) or not np.isfinite(self.k_max):
            raise InvalidArgumentError(
                f"need 0 < k_min < k_max, got k_min={self.k_min}, k_max={self.k_max}"
            )
        if int(self.n_k) != self.n_k or self.n_k < MIN_K_NODES:
            raise InvalidArgumentError(
                f"n_k must be an integer >= {MIN_K_NODES}, got {self.n_k}"
            )
        object.__setattr__(self, "n_k", int(self.n_k))

    @property
    def spacing(self) -> float:
        return (self.k_max - self.k_min) / (self.n_k - 1)

    @cached_property
    def values(self) -> np.ndarray:
        values = np.linspace(self.k_min, self.k_max, self.n_k)
        values.flags.writeable = False
        return values

    def index_of(self, k: float) -> int:
        """Return the index of *k* on the grid, or raise if it is not a node."""
        matches = np.flatnonzero(np.isclose(self.values, k, rtol=1e-12, atol=0.0))
        if matches.size == 0:
            raise InvalidArgumentError(f"k={k} is not a node of {self}")
        return int(matches[0])


@dataclass(frozen=True, eq=False)
class Field:
    """One finite sample per node of ``grid``; the values are read-only."""

    values: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_nodes,):
            raise InvalidArgumentError(
                f"field has shape {values.shape}, grid needs ({self.grid.n_nodes},)"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid1D) -> "Field":
        return cls(np.zeros(grid.n_nodes), grid)

    @classmethod
    def constant(cls, grid: Grid1D, value: float) -> "Field":
        return cls(np.full(grid.n_nodes, float(value)), grid)

    @classmethod
    def from_function(cls, grid: Grid1D, func: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(np.broadcast_to(func(grid.nodes), (grid.n_nodes,)), grid)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(values, self.grid)

    def __len__(self) -> int:
        return self.grid.n_nodes

    def _other_values(self, other: Union["Field", float]) -> np.ndarray | float:
        if isinstance(other, Field):
            require_same_grid(self, other)
            return other.values
        return float(other)

    def __add__(self, other: Union["Field", float]) -> "Field":
        return self.with_values(self.values + self._other_values(other))

    def __sub__(self, other: Union["Field", float]) -> "Field":
        return self.with_values(self.values - self._other_values(other))

    def __mul__(self, other: Union["Field", float]) -> "Field":
        return self.with_values(self.values * self._other_values(other))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return self.with_values(-self.values)


def require_same_grid(*fields: Field) -> Grid1D:
    """Return the common grid of *fields* or raise ``GridMismatchError``."""
    grid = fields[0].grid
    for field in fields[1:]:
        if field.grid != grid:
            raise GridMismatchError(f"grid mismatch: {field.grid} vs {grid}")
    return grid


def make_grid(z_max: float, n_nodes: int) -> Grid1D:
    return Grid1D(float(z_max), n_nodes)


def make_k_grid(k_min: float, k_max: float, n_k: int) -> KGrid:
    return KGrid(float(k_min), float(k_max), n_k)
