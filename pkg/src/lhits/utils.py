"""Shared plumbing: deterministic RNG streams and a simple ordered thread map."""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def _tag_to_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        if tag < 0:
            raise ValueError(f"rng tags must be non-negative, got {tag}")
        return int(tag)
    if isinstance(tag, str):
        return zlib.crc32(tag.encode("utf-8"))
    raise TypeError(f"unsupported rng tag type: {type(tag).__name__}")


def rng_for(seed: int, *tags) -> np.random.Generator:
    """Counter-based generator for an independent, reproducible stream.

    Streams are keyed by (seed, *tags); the same key always yields the same
    sequence, independent of what any other stream has consumed.
    """
    key = tuple(_tag_to_int(t) for t in tags)
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))


def resolve_threads(requested=None) -> int:
    """Worker count: explicit value, else LHITS_THREADS, else the CPU count."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("LHITS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def thread_map(fn, items, n_threads: int) -> list:
    """Map `fn` over `items` preserving order; serial when n_threads <= 1.

    Tasks must be independent; results are collected in submission order so
    the output is identical to the serial map.
    """
    items = list(items)
    if n_threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(n_threads, len(items))) as pool:
        return list(pool.map(fn, items))
