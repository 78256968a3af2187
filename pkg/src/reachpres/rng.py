"""Seeded randomness: one splitmix64-derived stream per named subsystem."""
from __future__ import annotations

import random
import zlib

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive(seed: int, name: str, index: int = 0) -> int:
    """64-bit seed for stream ``name`` / ``index`` under a master seed."""
    x = splitmix64((seed & _MASK) ^ zlib.crc32(name.encode()))
    return splitmix64(x ^ (index & _MASK))


def stream(seed: int, name: str, index: int = 0) -> random.Random:
    return random.Random(derive(seed, name, index))
