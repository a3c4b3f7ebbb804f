"""Deterministic chunked parallel map.

Work is split into fixed-size chunks whose boundaries do not depend on the
worker count; chunk results are concatenated in submission order.  The same
inputs therefore produce identical outputs for any --threads value.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

CHUNK_SIZE = 256


def default_threads() -> int:
    env = os.environ.get("CORRDYN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def pmap(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Map fn over items; chunking is fixed, so results ignore thread count."""
    n = len(items)
    if n == 0:
        return []
    chunks = [items[i : i + CHUNK_SIZE] for i in range(0, n, CHUNK_SIZE)]

    def run(chunk: Iterable[T]) -> list[R]:
        return [fn(x) for x in chunk]

    if threads <= 1 or len(chunks) == 1:
        out: list[R] = []
        for c in chunks:
            out.extend(run(c))
        return out
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(run, chunks))
    out = []
    for p in parts:
        out.extend(p)
    return out
