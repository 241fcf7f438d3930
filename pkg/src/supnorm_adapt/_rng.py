"""Seeded, order-independent random streams.

Every stream is addressed by a master seed plus a path of names and
integers, so replicate ``k`` always sees the same numbers no matter which
worker runs it or in what order.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    value = int(part)
    if value < 0:
        raise ValueError("stream path integers must be non-negative")
    return value


def seed_path(seed, *path) -> tuple[int, ...]:
    """Flatten a seed (int or tuple) and a stream path into integers."""
    if isinstance(seed, (tuple, list)):
        base = tuple(_key(s) for s in seed)
    else:
        base = (_key(seed),)
    return base + tuple(_key(p) for p in path)


def generator(seed, *path) -> np.random.Generator:
    """Counter-based generator for the stream ``seed/path``."""
    key = seed_path(seed, *path)
    ss = np.random.SeedSequence(entropy=key[0], spawn_key=key[1:])
    return np.random.Generator(np.random.Philox(ss))
