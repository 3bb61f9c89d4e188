"""Deterministic parallel mapping over independent work units."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV_VAR = "POLO_KIT_THREADS"


def worker_count() -> int:
    """Worker cap: POLO_KIT_THREADS when set (min 1), else the CPU count."""
    value = os.environ.get(THREADS_ENV_VAR)
    if value is not None:
        try:
            return max(1, int(value))
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {value!r}") from None
    return os.cpu_count() or 1


def ordered_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T]) -> list[R]:
    """Apply ``fn`` to items on a thread pool, preserving input order."""
    items = list(items)
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
