"""Seed derivation.

Every random stream is keyed by ``(master seed, purpose string, counters...)``
so that a sub-experiment draws the same numbers no matter how many workers
run it or in which order blocks are processed.
"""

import hashlib

import numpy as np


def _purpose_key(purpose: str) -> int:
    digest = hashlib.sha256(purpose.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def derive_rng(seed: int, purpose: str, *counters: int) -> np.random.Generator:
    """Return an independent generator for ``(seed, purpose, *counters)``."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    key = (_purpose_key(purpose),) + tuple(int(c) for c in counters)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))
