"""Seed derivation.

``derive_seed(master, i)`` is SplitMix64 applied to ``master + (i + 1) * GOLDEN``
modulo 2**64, so single iterations can be reproduced by external tools.
"""
import zlib

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# stream tags keep burn-in, sampling and row resampling independent
STREAM_SAMPLE = 0
STREAM_BURN_IN = 1
STREAM_ROWS = 2


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, i: int) -> int:
    """Seed of iteration ``i`` under ``master``; a pure function of both."""
    return splitmix64((int(master) + (int(i) + 1) * _GOLDEN) & _MASK64)


def name_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def node_stream(seed: int, name: str, tag: int = STREAM_SAMPLE) -> np.random.Generator:
    """Dedicated generator for one node, independent of every other node."""
    ss = np.random.SeedSequence([int(seed) & _MASK64, name_key(name), tag])
    return np.random.default_rng(ss)


def open_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` uniforms strictly inside (0, 1) on a 2**-53 grid."""
    k = rng.integers(0, 1 << 53, size=n, dtype=np.int64)
    return (k.astype(np.float64) + 0.5) / float(1 << 53)


def resolve_seed(seed) -> int:
    """Turn ``None``/int/Generator into a concrete non-negative integer seed."""
    if seed is None:
        return int(np.random.SeedSequence().entropy) & _MASK64
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 1 << 63))
    if isinstance(seed, (int, np.integer)):
        return int(seed) & _MASK64
    raise TypeError(f"cannot use {seed!r} as a seed")
