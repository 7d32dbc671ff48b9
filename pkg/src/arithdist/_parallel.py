"""Deterministic parallel map.

Work is cut into chunks whose boundaries depend only on the input length,
never on the worker count, and results are reassembled in input order. Each
task must be a pure function of its inputs (per-sample seeds are derived from
the sample index), so output is identical for any ``threads``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

CHUNK = 64

_threads = os.cpu_count() or 1


def set_threads(n: int | None) -> None:
    global _threads
    _threads = max(1, int(n)) if n else (os.cpu_count() or 1)


def get_threads() -> int:
    return _threads


def chunked_map(fn, items, chunk: int = CHUNK, threads: int | None = None) -> list:
    """``[fn(chunk) for chunk in chunks(items)]`` flattened, in input order.

    ``fn`` receives a list slice and must return a list of the same length.
    """
    items = list(items)
    chunks = [items[i:i + chunk] for i in range(0, len(items), chunk)]
    n = threads or _threads
    if n <= 1 or len(chunks) <= 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(fn, chunks))
    out = []
    for p in parts:
        out.extend(p)
    return out
