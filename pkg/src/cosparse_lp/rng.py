"""Seeded random streams. Every generator in the package is PCG64."""

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def child_seeds(seed: int, count: int) -> list[int]:
    """Independent 64-bit seeds derived from one master seed."""
    state = np.random.SeedSequence(int(seed)).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]
