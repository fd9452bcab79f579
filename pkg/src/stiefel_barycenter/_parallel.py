"""Deterministic reductions over data points.

Sums use a fixed binary tree so results do not depend on how many workers
produced the terms. The worker count is read from
``STIEFEL_BARYCENTER_THREADS`` (default 1).
"""

import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

ENV_THREADS = "STIEFEL_BARYCENTER_THREADS"
_forced_serial = False


def thread_count():
    if _forced_serial:
        return 1
    try:
        return max(1, int(os.environ.get(ENV_THREADS, "1")))
    except ValueError:
        return 1


@contextmanager
def serial():
    """Force single-threaded evaluation inside the block (used for timing)."""
    global _forced_serial
    old, _forced_serial = _forced_serial, True
    try:
        yield
    finally:
        _forced_serial = old


def pmap(fn, items):
    """``[fn(i, item) for ...]`` evaluated on a thread pool when allowed."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(i, x) for i, x in enumerate(items)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(items)), items))


def pairwise_sum(terms):
    terms = list(terms)
    if not terms:
        return 0.0
    while len(terms) > 1:
        nxt = [terms[i] + terms[i + 1] for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            nxt.append(terms[-1])
        terms = nxt
    return terms[0]
