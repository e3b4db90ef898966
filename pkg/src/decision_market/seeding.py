"""Seed handling shared by every experiment.

All randomness flows from one 64-bit master seed. Sweep replicates get
their own seeds through ``derive_seed``, which hashes (master, cell,
replicate) with numpy's SeedSequence, so results do not depend on the order
in which cells are evaluated.
"""
from __future__ import annotations

import numpy as np

GENERATOR_NAME = "numpy.random.Generator(PCG64)"

_MASK64 = (1 << 64) - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(check_seed(seed)))


def derive_seed(master: int, cell: int, replicate: int) -> int:
    """Child seed for replicate ``replicate`` of sweep cell ``cell``."""
    ss = np.random.SeedSequence(check_seed(master), spawn_key=(int(cell), int(replicate)))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)
