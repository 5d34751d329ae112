"""
Core protocol for measured-data sources and the data-table layout they share.
"""

from typing import Protocol

import numpy as np

from core.exceptions import DataSourceError
from core.forward import DataG
from core.grid import make_k_grid
from core.results import parse_table

DATA_COLUMNS = ("k", "g", "g_prime", "v0", "v0_prime")


class DataSource(Protocol):
    """Protocol for sources that yield the boundary data of one experiment."""

    def read(self, source: str) -> DataG:
        """Return the data table found at *source*."""
        ...


def data_from_table(text: str, source: str) -> DataG:
    """Build ``DataG`` from a ``k g g_prime v0 v0_prime`` table on a uniform k-grid."""
    columns, table = parse_table(text, source)
    if tuple(columns) != DATA_COLUMNS:
        raise DataSourceError(f"table {source} has columns {columns}, expected {list(DATA_COLUMNS)}")
    if table.shape[0] < 3:
        raise DataSourceError(f"table {source} needs at least 3 frequencies, got {table.shape[0]}")
    k = table[:, 0]
    steps = np.diff(k)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise DataSourceError(f"table {source} needs a uniform increasing k column")
    return DataG(
        k_grid=make_k_grid(k[0], k[-1], len(k)),
        g_values=table[:, 1],
        g_prime=table[:, 2],
        v0_values=table[:, 3],
        v0_prime=table[:, 4],
    )
