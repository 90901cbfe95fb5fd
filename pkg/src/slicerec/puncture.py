"""Puncturing patterns and rate selection against the side-information bound.

The number of parity bits worth transmitting for a string whose receiver
holds a copy corrupted at bit error rate e is governed by the binary entropy
h(e); the rate policy targets a fixed multiple of that bound and the pattern
generator spreads the surviving parity bits as evenly as the rational
fraction allows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RatePolicy:
    """Total transmitted-parity fraction as a multiple of the entropy bound.

    beta is the efficiency multiplier (>= 1; nothing beats the conditional
    entropy), min_rate/max_rate clamp the result.  The default beta of 1.35
    is the working margin for the 16-state code at block length 10000.
    """

    beta: float = 1.35
    min_rate: float = 0.02
    max_rate: float = 1.0

    def __post_init__(self):
        if self.beta < 1.0:
            raise ValueError("beta must be >= 1")
        if not 0.0 < self.min_rate <= self.max_rate <= 1.0:
            raise ValueError("need 0 < min_rate <= max_rate <= 1")


@dataclass
class PuncturePattern:
    """Which parity bits of one encoder are transmitted (mask value 1)."""

    mask: np.ndarray  # uint8, length N
    transmitted_count: int
    offset: int = 0

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=np.uint8)
        if int(self.mask.sum()) != self.transmitted_count:
            raise ValueError("transmitted_count does not match mask")

    def __len__(self) -> int:
        return self.mask.size


def binary_entropy(e):
    """Binary entropy h(e) in bits, with h(0) = h(1) = 0.

    Accepts scalars or arrays; raises ValueError outside [0, 1].
    """
    arr = np.asarray(e, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("probability outside [0, 1]")
    flat = np.atleast_1d(arr)
    out = np.zeros_like(flat)
    inner = (flat > 0.0) & (flat < 1.0)
    p = flat[inner]
    out[inner] = -(p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p))
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def rate_for_ber(e: float, policy: RatePolicy = RatePolicy()) -> float:
    """Total parity fraction (both encoders combined) for error rate ``e``.

    Returns clamp(beta * h(e), min_rate, max_rate).  ``e`` must lie strictly
    inside (0, 0.5); at and beyond 0.5 the strategy layer should have picked
    full disclosure instead.
    """
    if not 0.0 < e < 0.5:
        raise ValueError(f"error rate {e} outside (0, 0.5)")
    r = policy.beta * binary_entropy(e)
    return float(min(max(r, policy.min_rate), policy.max_rate))


def build_pattern_from_count(n: int, count: int, offset: int = 0) -> PuncturePattern:
    """Pattern with exactly ``count`` transmitted positions spread evenly.

    Ones sit at positions (floor(j*n/count) + offset) mod n for j < count,
    so patterns with the same count differ only by a cyclic shift.
    """
    if not 0 <= count <= n:
        raise ValueError(f"count {count} outside [0, {n}]")
    mask = np.zeros(n, dtype=np.uint8)
    if count > 0:
        j = np.arange(count, dtype=np.int64)
        pos = ((j * n) // count + offset) % n
        mask[pos] = 1
    return PuncturePattern(mask=mask, transmitted_count=count, offset=offset)


def build_pattern(n: int, r_enc: float, offset: int = 0) -> PuncturePattern:
    """Pattern transmitting round(r_enc * n) parity bits of one encoder."""
    if not 0.0 <= r_enc <= 1.0:
        raise ValueError(f"per-encoder rate {r_enc} outside [0, 1]")
    count = int(np.floor(r_enc * n + 0.5))  # nearest, ties up
    return build_pattern_from_count(n, count, offset)
