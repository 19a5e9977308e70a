"""Deterministic pseudo-random streams built on splitmix64.

Instance generators derive independent streams from a user seed plus a
short purpose tag, so generated artifacts are reproducible byte for byte
across runs and platforms, independent of Python's hash randomization.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _fnv1a(data: bytes) -> int:
    value = _FNV_OFFSET
    for byte in data:
        value = ((value ^ byte) * _FNV_PRIME) & _MASK64
    return value


class SplitMix64:
    """The splitmix64 sequence (Steele, Lea and Flood) over 64-bit state."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), rejection sampled to avoid modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        mask = (1 << (bound - 1).bit_length()) - 1 if bound > 1 else 0
        while True:
            value = self.next_u64() & mask
            if value < bound:
                return value

    def shuffle(self, values: list) -> list:
        """In-place Fisher-Yates shuffle; returns the list for chaining."""
        for i in range(len(values) - 1, 0, -1):
            j = self.below(i + 1)
            values[i], values[j] = values[j], values[i]
        return values


def stream(seed: int, tag: str) -> SplitMix64:
    """Independent generator for (seed, tag); equal inputs give equal streams."""
    root = SplitMix64((seed & _MASK64) ^ _fnv1a(tag.encode("utf-8")))
    return SplitMix64(root.next_u64())
