"""Seed derivation for reproducible, independent RNG streams.

One user seed fans out to per-stage streams keyed by ``(seed, tag, *indices)``.
The tag is hashed with CRC32 so the mapping is stable across processes and
Python versions (unlike ``hash()``).
"""

from __future__ import annotations

import zlib

import numpy as np


def _entropy(seed: int, tag: str, indices: tuple[int, ...]) -> list[int]:
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    return [int(seed), zlib.crc32(tag.encode("utf-8")), *(int(i) for i in indices)]


def derive_seed(seed: int, tag: str, *indices: int) -> int:
    """Return a 32-bit child seed for stream ``(seed, tag, *indices)``."""
    ss = np.random.SeedSequence(_entropy(seed, tag, indices))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def stream(seed: int, tag: str, *indices: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed, tag, indices)))
