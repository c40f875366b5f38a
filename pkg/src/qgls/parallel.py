"""Order-preserving thread-pool map, capped by the ``QGLS_THREADS`` variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List


def worker_count() -> int:
    raw = os.environ.get("QGLS_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n >= 1:
            return n
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Iterable) -> List:
    """``[fn(x) for x in items]``, evaluated concurrently; results keep input order."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
