"""Seeded random streams.

Everything random goes through counter-based Philox generators keyed by an
integer seed, so derived streams (restarts, reduce steps, buckets) are
reproducible regardless of scheduling.
"""

import numpy as np

SEED_MASK = (1 << 64) - 1


def make_rng(seed, *path) -> np.random.Generator:
    """Generator for ``seed``, optionally a child stream named by integer ``path``."""
    if isinstance(seed, np.random.Generator):
        return seed
    seed = int(seed) & SEED_MASK
    if path:
        ss = np.random.SeedSequence(seed, spawn_key=tuple(int(p) for p in path))
    else:
        ss = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 1 << 63))
