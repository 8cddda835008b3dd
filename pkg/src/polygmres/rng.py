"""Deterministic random numbers from the SplitMix64 recurrence.

The generator is pinned so that experiment outputs are bit-reproducible
across platforms and languages.  Output k (k >= 1) of the stream seeded
at s is ``mix(s + k * 0x9E3779B97F4A7C15)`` where ``mix`` is the
SplitMix64 finalizer of Steele, Lea and Flood:

    z ^= z >> 30;  z *= 0xBF58476D1CE4E9B5
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Doubles take the top 53 bits of the output mapped to [0, 1).  These
constants are part of the package's external interface.
"""

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_1 = np.uint64(0xBF58476D1CE4E9B5)
MIX_2 = np.uint64(0x94D049BB133111EB)

_MASK64 = 0xFFFFFFFFFFFFFFFF


def splitmix64(seed, count):
    """Return ``count`` raw 64-bit SplitMix64 outputs for ``seed``."""
    state = np.uint64(int(seed) & _MASK64)
    z = state + np.arange(1, count + 1, dtype=np.uint64) * GAMMA
    z = (z ^ (z >> np.uint64(30))) * MIX_1
    z = (z ^ (z >> np.uint64(27))) * MIX_2
    return z ^ (z >> np.uint64(31))


def uniform(seed, count, low=-1.0, high=1.0):
    """Uniform doubles in [low, high) drawn from the SplitMix64 stream."""
    u = (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64)
    return low + (high - low) * (u * 2.0**-53)
