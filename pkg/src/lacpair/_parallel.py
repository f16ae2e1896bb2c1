"""Ordered parallel map with a worker cap from ``PAIRCORR_THREADS``.

Results come back in input order, so every reduction downstream sees the
same sequence of values whatever the worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("PAIRCORR_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"PAIRCORR_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"PAIRCORR_THREADS must be a positive integer, got {raw!r}")
    return n


def parallel_map(fn, items):
    items = list(items)
    n = min(worker_count(), max(len(items), 1))
    if n == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
