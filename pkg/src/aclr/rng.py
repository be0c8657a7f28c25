"""Seeded random streams.

Every random draw goes through :func:`substream`, which derives an
independent PCG64 generator from a 64-bit base seed and a tuple of integer
keys (realization index, device index, ...).  A task therefore sees the same
numbers no matter which worker runs it or in what order.
"""

from __future__ import annotations

import numpy as np

# stream namespaces, so e.g. device 3 of an encode never collides with copy 3 of a decode
THERMAL = 1
SWEEP = 2
ENCODE = 3
DECODE = 4
MEASURE = 5


def substream(seed: int, *keys: int) -> np.random.Generator:
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return substream(int(rng))


def complex_gaussian(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def unit_phases(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(n))
