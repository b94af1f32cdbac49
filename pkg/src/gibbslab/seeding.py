"""Seed splitting: every sub-experiment seed derives from one root seed.

A child seed is ``SeedSequence(root, spawn_key=keys)`` where string keys are
mapped through CRC-32, so ``derive_seed(7, "theorem1", 12)`` names the same
stream on every machine and in every worker.
"""
import zlib

import numpy as np


def _key(k) -> int:
    if isinstance(k, (int, np.integer)):
        if k < 0:
            raise ValueError("integer seed keys must be nonnegative")
        return int(k)
    return zlib.crc32(str(k).encode("utf-8"))


def seed_sequence(root: int, *keys) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(root), spawn_key=tuple(_key(k) for k in keys))


def derive_seed(root: int, *keys) -> int:
    """A 63-bit integer seed for the stream named by ``keys``."""
    return int(seed_sequence(root, *keys).generate_state(2, dtype=np.uint32).view(np.uint64)[0] >> np.uint64(1))


def rng(root: int, *keys) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(root, *keys))
