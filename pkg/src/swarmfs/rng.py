"""Seeded random streams.

Every random draw in the toolkit comes from a PCG64 generator whose seed
sequence is derived from the run seed plus a path of stream keys, e.g.
``stream(seed, "pso", particle_index)``. Streams with different paths are
statistically independent, so the order in which callers create them never
changes the numbers they produce.
"""
import zlib

import numpy as np


def _key(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def stream(seed, *path):
    """Return a fresh generator for ``seed`` and the named sub-stream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def draw_seed(rng):
    """Draw a 63-bit integer seed for a component with its own generator."""
    return int(rng.integers(0, 2**63 - 1))
