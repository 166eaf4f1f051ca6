"""Seedable, platform-stable pseudo-random numbers for disorder ensembles.

The generator is SplitMix64 (Steele, Lea & Flood's mixing constants): a
64-bit counter advanced by the golden-ratio increment, hashed through two
xor-shift/multiply rounds. It is tiny, splittable by seed arithmetic, and
produces identical streams on every platform, which is what makes disorder
ensembles reproducible bit-for-bit. Uniform doubles are built from the top
53 bits of each output word.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 stream seeded by a 64-bit integer."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float, n: int) -> np.ndarray:
        """n independent uniforms on [lo, hi)."""
        return np.array([lo + (hi - lo) * self.random() for _ in range(n)])


def disorder_offsets(seed: int, bound: float, cells: int) -> np.ndarray:
    """Per-cell offsets delta(x), uniform on [-bound, bound)."""
    return SplitMix64(seed).uniform(-bound, bound, cells)
