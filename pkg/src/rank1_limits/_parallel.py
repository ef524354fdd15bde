"""Ordered thread pool map; results never depend on the thread count."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "RANK1_LIMITS_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        raw = os.environ.get(ENV_THREADS, "1")
        try:
            threads = int(raw)
        except ValueError:
            threads = 1
    return max(1, int(threads))


def ordered_map(fn, items, threads: int | None = None) -> list:
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
