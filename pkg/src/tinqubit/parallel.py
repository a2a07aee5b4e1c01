"""Keyed random streams and an order-preserving worker pool."""

from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor

import numpy as np


def keyed_rng(seed: int, index: int, tag: str) -> np.random.Generator:
    """Independent Philox stream for (seed, index, tag); stable across runs and platforms."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([seed, index, zlib.crc32(tag.encode())]))
    )


def parallel_map(fn, tasks, workers: int = 1):
    """map(fn, tasks) with results in task order, whatever the worker count."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))
