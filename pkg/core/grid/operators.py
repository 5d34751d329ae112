"""Finite-difference operators, trapezoidal quadrature and the discrete H² form.

All operators are sparse matrices cached per grid. Second-order central
stencils are used in the interior and second-order one-sided stencils at both
ends, so a boundary condition on a first derivative is imposed at the same
order as the interior equations.

The constrained space ``{u : u(0) = u'(0) = u'(Z) = 0}`` is represented by a
basis matrix ``P`` whose columns are the free nodes ``2 .. n-2``; nodes 0, 1
and n-1 are eliminated through the discrete trace relations.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from core.exceptions import InvalidArgumentError, SolverError
from core.grid.grid import Field, Grid1D, require_same_grid

logger = logging.getLogger(__name__)

METRICS = ("h2", "l2")


def _assemble(n: int, entries: list[tuple[int, int, float]]) -> sparse.csr_matrix:
    rows, cols, vals = zip(*entries)
    return sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


@lru_cache(maxsize=32)
def d1_matrix(grid: Grid1D) -> sparse.csr_matrix:
    n, h = grid.n_nodes, grid.spacing
    entries = [(0, 0, -1.5 / h), (0, 1, 2.0 / h), (0, 2, -0.5 / h)]
    for i in range(1, n - 1):
        entries += [(i, i - 1, -0.5 / h), (i, i + 1, 0.5 / h)]
    entries += [(n - 1, n - 3, 0.5 / h), (n - 1, n - 2, -2.0 / h), (n - 1, n - 1, 1.5 / h)]
    return _assemble(n, entries)


@lru_cache(maxsize=32)
def d2_matrix(grid: Grid1D) -> sparse.csr_matrix:
    n, h2 = grid.n_nodes, grid.spacing**2
    entries = [(0, j, c / h2) for j, c in enumerate((2.0, -5.0, 4.0, -1.0))]
    for i in range(1, n - 1):
        entries += [(i, i - 1, 1.0 / h2), (i, i, -2.0 / h2), (i, i + 1, 1.0 / h2)]
    entries += [(n - 1, n - 4 + j, c / h2) for j, c in enumerate((-1.0, 4.0, -5.0, 2.0))]
    return _assemble(n, entries)


@lru_cache(maxsize=32)
def trapezoid_weights(grid: Grid1D) -> np.ndarray:
    weights = np.full(grid.n_nodes, grid.spacing)
    weights[[0, -1]] *= 0.5
    weights.flags.writeable = False
    return weights


@lru_cache(maxsize=32)
def gram_matrix(grid: Grid1D, metric: str = "h2") -> sparse.csr_matrix:
    """Matrix ``G`` with ``<f, g> = f @ G @ g`` for the requested metric."""
    if metric not in METRICS:
        raise InvalidArgumentError(f"unknown metric {metric!r}, expected one of {METRICS}")
    w = sparse.diags(trapezoid_weights(grid))
    if metric == "l2":
        return w.tocsr()
    d1, d2 = d1_matrix(grid), d2_matrix(grid)
    return (w + d1.T @ w @ d1 + d2.T @ w @ d2).tocsr()


@lru_cache(maxsize=32)
def constrained_basis(grid: Grid1D) -> sparse.csr_matrix:
    """Basis ``P`` (n x n-3) of fields with zero value and slope at 0 and zero slope at Z."""
    n = grid.n_nodes
    free = list(range(2, n - 1))
    rows = free + [1, n - 1, n - 1]
    # column j holds free node j + 2
    cols = [node - 2 for node in free] + [0, n - 4, n - 5]
    # u1 = u2 / 4 and u_{n-1} = (4 u_{n-2} - u_{n-3}) / 3 zero the one-sided slopes
    vals = [1.0] * len(free) + [0.25, 4.0 / 3.0, -1.0 / 3.0]
    return sparse.coo_matrix((vals, (rows, cols)), shape=(n, n - 3)).tocsr()


@lru_cache(maxsize=32)
def _reduced_solver(grid: Grid1D, metric: str):
    basis = constrained_basis(grid)
    reduced = (basis.T @ gram_matrix(grid, metric) @ basis).tocsc()
    logger.debug("factorizing reduced %s Gram system n=%d", metric, reduced.shape[0])
    return splu(reduced)


def diff1(f: Field) -> Field:
    return f.with_values(d1_matrix(f.grid) @ f.values)


def diff2(f: Field) -> Field:
    return f.with_values(d2_matrix(f.grid) @ f.values)


def quad_weighted(f: Field, w: Field) -> float:
    """Trapezoidal approximation of the integral of ``f * w`` over ``[0, Z]``."""
    grid = require_same_grid(f, w)
    return float(trapezoid_weights(grid) @ (f.values * w.values))


def h2_inner(f: Field, g: Field) -> float:
    grid = require_same_grid(f, g)
    return float(f.values @ (gram_matrix(grid) @ g.values))


def h2_norm(f: Field) -> float:
    return float(np.sqrt(max(h2_inner(f, f), 0.0)))


def riesz_from_load(load: np.ndarray, grid: Grid1D, metric: str = "h2") -> np.ndarray:
    """Solve ``<u, h> = load @ h`` for every constrained ``h`` with ``u`` constrained.

    ``load`` is the Euclidean derivative of a discrete functional with respect
    to the nodal values; the result is its Riesz representative in the chosen
    metric restricted to the constrained space.
    """
    basis = constrained_basis(grid)
    coefficients = _reduced_solver(grid, metric).solve(basis.T @ np.asarray(load, dtype=float))
    if not np.all(np.isfinite(coefficients)):
        raise SolverError(f"reduced {metric} Gram solve returned non-finite values")
    return basis @ coefficients


def riesz_h2(l2_grad: Field, basis: sparse.spmatrix | None = None) -> Field:
    """H² Riesz representative of the functional ``h -> quad_weighted(l2_grad, h)``.

    ``basis`` selects the constrained degrees of freedom; by default the
    space ``u(0) = u'(0) = u'(Z) = 0`` is used.
    """
    grid = l2_grad.grid
    load = trapezoid_weights(grid) * l2_grad.values
    if basis is None:
        return l2_grad.with_values(riesz_from_load(load, grid))
    gram = basis.T @ gram_matrix(grid) @ basis
    coefficients = splu(sparse.csc_matrix(gram)).solve(basis.T @ load)
    if not np.all(np.isfinite(coefficients)):
        raise SolverError("constrained H2 Gram solve returned non-finite values")
    return l2_grad.with_values(basis @ coefficients)


def constrained_traces(values: np.ndarray, grid: Grid1D) -> tuple[float, float, float]:
    """Discrete ``(u(0), u'(0), u'(Z))`` as seen by the one-sided stencils."""
    slopes = d1_matrix(grid) @ values
    return float(values[0]), float(slopes[0]), float(slopes[-1])
