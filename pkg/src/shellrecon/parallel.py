"""Order-preserving map with an optional thread cap from ``SHELLRECON_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "SHELLRECON_THREADS"


def thread_count() -> int:
    """Worker count; unset, empty or invalid values mean serial execution."""
    raw = os.environ.get(ENV_THREADS, "").strip()
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pmap(fn, items) -> list:
    """``[fn(x) for x in items]``, threaded when the cap exceeds 1.

    Results always come back in input order, so output is the same for any
    thread count.
    """
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
