"""Deterministic random streams.

Every random draw in labgan goes through a numpy Generator built from a
SeedSequence, so a (seed, keys) pair names one stream and two different
key paths never share draws.
"""

import zlib

import numpy as np


def _key_to_int(key: int | str) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode())
    return int(key)


def seed_sequence(seed: int, *keys: int | str) -> np.random.SeedSequence:
    """SeedSequence for a seed and a path of sub-stream keys.

    String keys are hashed with crc32, which is stable across processes
    (unlike hash()).
    """
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key_to_int(k) for k in keys))


def rng_for(seed: int, *keys: int | str) -> np.random.Generator:
    """Generator for a seed and sub-stream keys."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *keys)))


def derive_seed(seed: int, *keys: int | str) -> int:
    """Derive a 31-bit integer seed for a named sub-task."""
    return int(seed_sequence(seed, *keys).generate_state(1, dtype=np.uint32)[0] >> 1)
