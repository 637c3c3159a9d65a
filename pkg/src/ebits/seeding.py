"""Counter-based random streams.

Trials are grouped into fixed blocks of ``BLOCK_SIZE``. Block ``b`` of a run
with seed ``s`` draws from ``PCG64(SeedSequence(s, spawn_key=(b,)))``;
``SeedSequence`` hashes the (seed, counter) pair through an avalanche mixer,
so streams for different blocks are independent and any worker can rebuild
any block's stream without coordination. Trial ``i`` is the
``i % BLOCK_SIZE``-th trial drawn from block ``i // BLOCK_SIZE``.
"""

from __future__ import annotations

import numpy as np

BLOCK_SIZE = 1024
SEED_MAX = 2**64 - 1


def block_rng(seed: int, block: int) -> np.random.Generator:
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.PCG64(ss))


def blocks(trials: int, block_size: int = BLOCK_SIZE) -> list[tuple[int, int]]:
    """``(block_index, n_trials_in_block)`` covering ``trials`` trials."""
    out = []
    for b, start in enumerate(range(0, trials, block_size)):
        out.append((b, min(block_size, trials - start)))
    return out
