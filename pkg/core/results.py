"""Result files: tab-separated tables with one header line, and JSON reports."""

from __future__ import annotations

import io
import json
import logging
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from core.exceptions import DataSourceError, InvalidArgumentError

logger = logging.getLogger(__name__)

TABLE_FORMAT = "%.12e"
HEADER_PREFIX = "# "


def write_table(path: str | Path, columns: Sequence[str], rows: np.ndarray) -> Path:
    """Write *rows* under a ``# col1<TAB>col2 ...`` header line."""
    path = Path(path)
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size and rows.shape[1] != len(columns):
        raise InvalidArgumentError(f"{path.name}: {rows.shape[1]} columns of data for {len(columns)} names")
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path, rows.reshape(-1, len(columns)), fmt=TABLE_FORMAT, delimiter="\t",
        header="\t".join(columns), comments=HEADER_PREFIX,
    )
    logger.info("wrote table %s rows=%d", path, rows.shape[0] if rows.size else 0)
    return path


def parse_table(text: str, source: str) -> tuple[list[str], np.ndarray]:
    """Split a table into its column names and a 2-D array."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise DataSourceError(f"table {source} has no '#' header line")
    columns = lines[0].lstrip("#").split()
    try:
        data = np.loadtxt(io.StringIO(text), comments="#", delimiter="\t", ndmin=2)
    except ValueError as exc:
        raise DataSourceError(f"Error parsing table {source}: {exc}") from exc
    if data.size and data.shape[1] != len(columns):
        raise DataSourceError(
            f"table {source} has {data.shape[1]} columns but the header names {len(columns)}"
        )
    return columns, data


def read_table(path: str | Path, encoding: str = "utf-8") -> tuple[list[str], np.ndarray]:
    try:
        text = Path(path).read_text(encoding=encoding)
    except OSError as exc:
        raise DataSourceError(f"Error reading table {path}: {exc}") from exc
    return parse_table(text, str(path))


def write_json(path: str | Path, payload: dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
    logger.info("wrote report %s", path)
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")
