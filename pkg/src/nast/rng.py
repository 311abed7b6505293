"""Seed derivation and random generator construction.

All randomness in this package flows through PCG64 generators keyed by
``numpy.random.SeedSequence``.  Child streams are derived by hashing the
user seed together with small integer tags, so independently derived
streams (per replicate, per candidate K0, ...) never depend on execution
order and runs are reproducible bit-for-bit.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seed", "generator"]


def derive_seed(seed: int, *key: int) -> int:
    """Hash ``(seed, *key)`` into an independent 63-bit child seed."""
    ss = np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0] >> 1)


def generator(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for the stream named by ``(seed, *key)``."""
    ss = np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
