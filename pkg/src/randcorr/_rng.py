"""Counter-style random streams.

Every random draw is keyed by ``(master seed, purpose, block index)``; a block
covers ``BLOCK`` consecutive setting indices and always draws a full block, so
sample ``i`` is the same no matter how many samples were requested or how the
blocks were distributed over workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

BLOCK = 1024
SEED_LIMIT = 2**64

# stream purposes
SETTINGS = 1
SHOTS = 2
HAAR = 3
REPETITION = 4
ROTATIONS = 5
PRODUCT = 6

T = TypeVar("T")


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or int(seed) != seed:
        raise TypeError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def stream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    """Independent Philox generator for one (seed, purpose, index) key."""
    seq = np.random.SeedSequence(check_seed(seed), spawn_key=(purpose, index))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed: int, purpose: int, index: int) -> int:
    """A 64-bit child seed, used for repetitions and sweep cells."""
    seq = np.random.SeedSequence(check_seed(seed), spawn_key=(purpose, index))
    lo, hi = seq.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def resolve_threads(threads: int | None) -> int:
    """Worker count: explicit value, else RANDCORR_THREADS, else 1; 0 means auto."""
    if threads is None:
        env = os.environ.get("RANDCORR_THREADS", "").strip()
        threads = int(env) if env else 1
    if threads < 0:
        raise ValueError("threads must be >= 0")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


def block_ranges(count: int) -> list[tuple[int, int, int]]:
    """(block index, start, stop) triples covering ``range(count)``."""
    return [
        (b, b * BLOCK, min((b + 1) * BLOCK, count))
        for b in range((count + BLOCK - 1) // BLOCK)
    ]


def map_ordered(fn: Callable[[T], object], items: Sequence[T], threads: int | None) -> list:
    """Map over items, possibly in threads, returning results in input order."""
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
