"""Deterministic pseudo-random streams shared by data generation and training.

The generator family is fixed on purpose: splitmix64 for seeding and for
counter-style key streams, xoshiro256** for sequential draws, and Box-Muller
for normals. All state updates are plain 64-bit integer arithmetic, so any
implementation that follows the same recipe reproduces identical datasets
and shuffles bit for bit.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 2.0 ** -53


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Counter-based 64-bit generator; output k for seed s is mix(s + (k+1)*golden)."""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        return _mix64(self.state)


def splitmix64_at(seed: int, index: int) -> int:
    """Output number `index` (0-based) of SplitMix64(seed), in closed form.

    Used to derive decorrelated child seeds without advancing any state.
    """
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    if index < 0:
        raise ValueError("index must be nonnegative")
    return _mix64((seed + (index + 1) * _GOLDEN) & _MASK64)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** with its state filled from four successive splitmix64 outputs."""

    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self._s = [sm.next_u64() for _ in range(4)]
        self._spare_normal: float | None = None

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1), from the top 53 bits of one draw."""
        return (self.next_u64() >> 11) * _INV_2_53

    def normal(self) -> float:
        """Standard normal via Box-Muller; the sine mate is cached for the next call."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        # u1 is shifted into (0, 1] so the log stays finite.
        u1 = ((self.next_u64() >> 11) + 1) * _INV_2_53
        u2 = (self.next_u64() >> 11) * _INV_2_53
        radius = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_normal = radius * math.sin(theta)
        return radius * math.cos(theta)

    def randbelow(self, n: int) -> int:
        """Integer in [0, n) as next_u64() % n; the modulo bias is < n / 2**64."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n


def permutation_keys(seed: int, n: int) -> np.ndarray:
    """Outputs 1..n of SplitMix64(seed) as a uint64 array, computed in one shot.

    Exactly matches n sequential next_u64() calls; the closed counter form just
    lets numpy produce the whole block at once.
    """
    idx = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + idx * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def permutation(seed: int, n: int) -> np.ndarray:
    """Deterministic permutation of range(n): argsort of the splitmix64 key stream."""
    return np.argsort(permutation_keys(seed, n), kind="stable")
