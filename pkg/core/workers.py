"""Ordered fan-out of independent work items over a thread pool."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from core.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(threads: int | None) -> int:
    """``0`` or ``None`` means one worker per CPU."""
    if threads is None or threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise InvalidArgumentError(f"threads must be >= 0, got {threads}")
    return int(threads)


def parallel_map(func: Callable[[T], R], items: Iterable[T], max_workers: int | None) -> list[R]:
    """Apply *func* to every item; results keep the input order."""
    items = list(items)
    if max_workers is None or max_workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug("fanning out %d items over %d workers", len(items), max_workers)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(func, items))
