"""Thread-pool mapping with deterministic result order."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "BOSON_ENTROPY_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Requested count, capped by BOSON_ENTROPY_THREADS and the CPU count."""
    limit = os.cpu_count() or 1
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            limit = max(1, int(env))
        except ValueError:
            pass
    if requested is None:
        return limit
    return max(1, min(requested, limit))


def ordered_map(fn, items, threads: int | None = None) -> list:
    """``[fn(x) for x in items]``, possibly evaluated concurrently; output order follows ``items``."""
    items = list(items)
    workers = worker_count(threads)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
