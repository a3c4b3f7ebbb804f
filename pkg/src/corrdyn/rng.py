"""Deterministic 64-bit PRNG (splitmix64-seeded xoshiro256**).

All stochastic outputs of the library flow through this generator so that
runs are reproducible bit-for-bit from a user seed, independent of platform
and thread count.  Sub-streams for parallel chains are derived with
``sub_seed``, which mixes the chain index into the seed through splitmix64.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z = z ^ (z >> 31)
    return state, z


def sub_seed(seed: int, index: int) -> int:
    """Derive the seed of parallel chain ``index`` from a master seed."""
    s = (seed ^ ((index + 1) * 0xD2B74407B1CE6E93)) & _MASK
    _, out = _splitmix64(s)
    return out


class Rng:
    """xoshiro256** stream seeded via splitmix64 expansion of ``seed``."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        state = seed & _MASK
        state, self._s0 = _splitmix64(state)
        state, self._s1 = _splitmix64(state)
        state, self._s2 = _splitmix64(state)
        state, self._s3 = _splitmix64(state)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        x = (s1 * 5) & _MASK
        result = (((x << 7) | (x >> 57)) & _MASK) * 9 & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def u01(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (unbiased)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (_MASK + 1) - ((_MASK + 1) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def uniform_disk(self, radius: float) -> complex:
        """Uniform point in the closed disk of given radius centered at 0."""
        import math

        r = radius * math.sqrt(self.u01())
        theta = 6.283185307179586 * self.u01()
        return complex(r * math.cos(theta), r * math.sin(theta))

    def uniform_annulus_radius(self, r_lo: float, r_hi: float) -> float:
        """Radius distributed uniformly in [r_lo, r_hi] (not area-uniform)."""
        return r_lo + (r_hi - r_lo) * self.u01()

    def pick_weighted(self, weights: list[int]) -> int:
        """Index chosen with probability weights[i] / sum(weights)."""
        total = sum(weights)
        r = self.u01() * total
        acc = 0.0
        for i, m in enumerate(weights):
            acc += m
            if r < acc:
                return i
        return len(weights) - 1
