"""Portable seeded pseudo-random generator used throughout the package.

Every randomized procedure (interleaver construction, Cascade pass
permutations, source generation, channel noise) draws from this generator so
that runs are bit-reproducible across machines and across independent
implementations of the same scheme.  The core is the SplitMix64 output
function (Steele, Lea & Flood), a 64-bit xorshift-multiply mixer with fixed
published constants; being counter-based, it vectorizes cleanly with numpy
uint64 arithmetic.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_STREAM_SALT = 0x6A09E667F3BCC909  # fractional bits of sqrt(2)


def mix64(z: int) -> int:
    """SplitMix64 finalizer: bijective 64-bit mixing of ``z``."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class PortableRng:
    """Counter-mode SplitMix64 stream.

    Output i of a stream seeded with s is ``mix64(s + (i+1)*GOLDEN)``, all
    arithmetic modulo 2**64.  ``derive`` splits off statistically independent
    substreams for named purposes without perturbing the parent.
    """

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._counter = 0

    @property
    def seed(self) -> int:
        return self._seed

    def derive(self, tag: int) -> "PortableRng":
        """Independent child stream for substream index ``tag``."""
        return PortableRng(mix64(self._seed ^ mix64((tag & _MASK64) ^ _STREAM_SALT)))

    def next_u64(self) -> int:
        self._counter = (self._counter + 1) & _MASK64
        return mix64((self._seed + self._counter * _GOLDEN) & _MASK64)

    def u64_block(self, n: int) -> np.ndarray:
        """Next ``n`` outputs as a uint64 array (vectorized, wraps mod 2^64)."""
        if n < 0:
            raise ValueError("n must be >= 0")
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        z = (np.uint64(self._seed) + idx * np.uint64(_GOLDEN)).astype(np.uint64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
        self._counter = (self._counter + n) & _MASK64
        return z

    def uniform01(self, n: int) -> np.ndarray:
        """``n`` doubles strictly inside (0, 1), 53-bit resolution."""
        u = self.u64_block(n) >> np.uint64(11)
        return (u.astype(np.float64) + 0.5) * (2.0 ** -53)

    def gaussian(self, n: int) -> np.ndarray:
        """``n`` standard normal deviates via the inverse CDF."""
        from scipy.special import ndtri

        return ndtri(self.uniform01(n))

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("n must be >= 1")
        lim = ((1 << 64) // n) * n
        while True:
            v = self.next_u64()
            if v < lim:
                return v % n

    def permutation(self, n: int) -> np.ndarray:
        """Uniform permutation of range(n) by sorting one u64 key per slot.

        Stable argsort of 64-bit keys; a tie (probability ~n^2/2^64) falls
        back to index order, which keeps the result deterministic.
        """
        keys = self.u64_block(n)
        return np.argsort(keys, kind="stable")

    def bernoulli(self, n: int, p: float) -> np.ndarray:
        """``n`` independent {0,1} flips with P(1) = p."""
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        return (self.uniform01(n) < p).astype(np.uint8)
