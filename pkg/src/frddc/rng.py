"""Portable counter-based pseudo-random numbers (SplitMix64).

Noise injected into datasets must be reproducible bit-exactly from a seed,
independently of platform, process or numpy version.  numpy's own generators
do not promise cross-version stream stability, so the generator is pinned
here explicitly: the k-th draw is ``mix64(seed + k * GOLDEN)`` where
``mix64`` is Vigna's SplitMix64 finalizer.  Uniform doubles take the top
53 bits, giving values in [0, 1).

Reference: S. Vigna, http://prng.di.unimi.it/splitmix64.c
"""

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1


def splitmix64(seed: int, count: int) -> np.ndarray:
    """Return the first `count` raw 64-bit outputs for `seed` as uint64."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    k = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK) + k * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def uniform(seed: int, count: int) -> np.ndarray:
    """Return `count` doubles uniform on [0, 1), reproducible from `seed`."""
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def splitmix64_scalar(seed: int, index: int) -> int:
    """Pure-integer single draw (index is 1-based); oracle for the array path."""
    z = (seed + index * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return (z ^ (z >> 31)) & _MASK
