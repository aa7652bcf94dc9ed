"""Thread-pool helper honouring the ``SL_LAB_THREADS`` environment variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def max_threads() -> int:
    """Thread cap from ``SL_LAB_THREADS`` (default 1, i.e. serial)."""
    raw = os.environ.get("SL_LAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"SL_LAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"SL_LAB_THREADS must be a positive integer, got {raw!r}")
    return n


def parallel_map(func: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map, run on up to ``max_threads()`` threads."""
    items = list(items)
    n = min(max_threads(), len(items))
    if n <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
