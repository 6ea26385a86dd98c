"""Deterministic 64-bit PRNG used wherever randomness must replay exactly.

Pure-Python splitmix64 so the integer stream is bit-identical on every
platform and trivially portable to other languages.
"""

import math

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_DOUBLE_SCALE = 2.0 ** -53


class SplitMix64:
    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        self._state = seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _DOUBLE_SCALE

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound) with rejection to avoid modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            z = self.next_u64()
            if z < limit:
                return z % bound

    def normals(self, n: int) -> list[float]:
        """n standard normals via Box-Muller on consecutive uniform pairs."""
        out: list[float] = []
        while len(out) < n:
            u1 = self.next_double()
            u2 = self.next_double()
            if u1 == 0.0:
                u1 = _DOUBLE_SCALE  # log(0) guard; probability 2**-53 per draw
            r = math.sqrt(-2.0 * math.log(u1))
            out.append(r * math.cos(2.0 * math.pi * u2))
            if len(out) < n:
                out.append(r * math.sin(2.0 * math.pi * u2))
        return out

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle driven by this stream."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n); order is part of the contract."""
        if k > n:
            raise ValueError(f"cannot sample {k} items from {n}")
        idx = list(range(n))
        for i in range(k):
            j = i + self.next_below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]
