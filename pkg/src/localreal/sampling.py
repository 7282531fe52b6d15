"""Deterministic counter-based sampling utilities.

All randomness flows through Philox streams keyed by (seed, stream index) or by
a stable hash, so results are bit-identical across runs, platforms, and thread
counts. Stream 0 of a seed is reserved for setup draws (model generation);
chunked Monte Carlo uses streams 1, 2, ... so the two never collide.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

CHUNK_SIZE = 1 << 16
_MASK64 = (1 << 64) - 1


def generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for one (seed, stream) pair."""
    key = ((int(seed) & _MASK64) << 64) | (int(stream) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def keyed_uniform(count: int, *parts) -> np.ndarray:
    """Uniform [0, 1) draws keyed by a stable hash of ``parts``.

    Bytes parts enter the hash raw; everything else via ``str``. Used to give
    randomly generated models a fixed, reproducible value at every setting.
    """
    h = hashlib.blake2b(digest_size=16)
    for part in parts:
        h.update(part if isinstance(part, bytes) else str(part).encode())
        h.update(b"\x1f")
    rng = np.random.Generator(np.random.Philox(key=int.from_bytes(h.digest(), "little")))
    return rng.random(count)


def chunked_mean(
    chunk_values: Callable[[np.random.Generator, int], np.ndarray],
    n: int,
    seed: int,
    threads: int = 1,
) -> tuple[float, float]:
    """Mean and standard error of ``n`` draws produced chunk by chunk.

    ``chunk_values(rng, count)`` must return ``count`` samples from the given
    generator. Chunk boundaries are fixed and each chunk owns its own stream,
    so the partial sums do not depend on the thread count; they are combined
    with exact summation.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    n_chunks = -(-n // CHUNK_SIZE)

    def one(index: int) -> tuple[float, float]:
        count = min(CHUNK_SIZE, n - index * CHUNK_SIZE)
        x = np.asarray(chunk_values(generator(seed, index + 1), count), dtype=float)
        return float(np.sum(x)), float(np.sum(x * x))

    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(n_chunks)))
    else:
        parts = [one(i) for i in range(n_chunks)]

    total = math.fsum(p[0] for p in parts)
    total_sq = math.fsum(p[1] for p in parts)
    mean = total / n
    if n > 1:
        var = max(0.0, (total_sq - total * total / n) / (n - 1))
        std_error = math.sqrt(var / n)
    else:
        std_error = 0.0
    return mean, std_error


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed direction in R^3."""
    while True:
        v = rng.standard_normal(3)
        norm = float(np.linalg.norm(v))
        if norm > 1e-6:
            return v / norm
