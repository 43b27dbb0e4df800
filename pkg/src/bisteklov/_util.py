"""Small shared helpers."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, items):
    """Map fn over items on a thread pool, preserving input order.

    Worker count is capped by the STEKLOV_THREADS environment variable; the heavy
    work in each task is dense linear algebra, which releases the interpreter lock.
    """
    items = list(items)
    if len(items) <= 1:
        return [fn(x) for x in items]
    env = os.environ.get("STEKLOV_THREADS", "")
    try:
        cap = int(env) if env else (os.cpu_count() or 1)
    except ValueError:
        cap = os.cpu_count() or 1
    workers = max(1, min(cap, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
