"""Counter-based random streams.

Draw ``i`` of a sampler seeded with ``seed`` always comes from block
``i // BLOCK_SIZE`` of a Philox generator keyed by ``seed`` whose counter's
high word is the block index. Any range of draws can therefore be produced
independently of the others, so splitting a sample across workers by index
range gives bit-identical results to a serial run.
"""

from __future__ import annotations

import numpy as np

__all__ = ["BLOCK_SIZE", "block_generator", "counter_draws", "derive_seed"]

BLOCK_SIZE = 1 << 16
_MASK64 = (1 << 64) - 1


def block_generator(seed, block):
    """Generator for block ``block`` of the stream keyed by ``seed``."""
    return np.random.Generator(
        np.random.Philox(key=int(seed) & _MASK64, counter=[0, 0, 0, int(block)])
    )


def counter_draws(seed, start, stop, fill_block):
    """Draws ``start .. stop-1`` of the stream defined by ``fill_block``.

    Parameters
    ----------
    seed : int
        64-bit key.
    start, stop : int
        Half-open index range.
    fill_block : callable
        ``fill_block(generator, BLOCK_SIZE) -> ndarray`` producing one full
        block of draws along axis 0. It must consume the generator
        deterministically.
    """
    if stop <= start:
        return fill_block(block_generator(seed, 0), 0)
    first, last = start // BLOCK_SIZE, (stop - 1) // BLOCK_SIZE
    parts = []
    for block in range(first, last + 1):
        chunk = fill_block(block_generator(seed, block), BLOCK_SIZE)
        lo = max(start - block * BLOCK_SIZE, 0)
        hi = min(stop - block * BLOCK_SIZE, BLOCK_SIZE)
        parts.append(chunk[lo:hi])
    return np.concatenate(parts, axis=0)


def derive_seed(base_seed, *path):
    """Child seed for e.g. trial ``t`` of an experiment keyed by ``base_seed``."""
    ss = np.random.SeedSequence(int(base_seed) & _MASK64, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
