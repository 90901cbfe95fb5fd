"""Parity-aware pseudo-random interleaver.

Source bits are split into two groups by whether their first-encoder parity
bit is transmitted.  Each group is shuffled separately, then groups are
placed so that the second encoder's puncturing complements the first's:
group-1 bits (parity already sent) are routed to punctured second-encoder
slots in priority, group-2 bits to transmitted slots.  This makes the number
of source bits with both parity bits transmitted, and the number with none,
simultaneously minimal for the two patterns' transmission counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .puncture import PuncturePattern
from .rng import PortableRng

_STREAM_GROUP1 = 0x11
_STREAM_GROUP2 = 0x12
_STREAM_SLOTS_PUNCT = 0x14
_STREAM_SLOTS_SENT = 0x15


@dataclass
class Permutation:
    """Bit-position permutation; output[j] = input[forward[j]]."""

    forward: np.ndarray  # int64, a bijection on [0, N)
    seed: int
    group_boundary: int  # number of group-1 source positions
    inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.forward = np.asarray(self.forward, dtype=np.int64)
        inv = np.empty_like(self.forward)
        inv[self.forward] = np.arange(self.forward.size, dtype=np.int64)
        self.inverse = inv

    def __len__(self) -> int:
        return self.forward.size


def build_interleaver(
    n: int,
    pattern1: PuncturePattern,
    pattern2: PuncturePattern,
    seed: int,
) -> Permutation:
    """Construct the parity-aware permutation for block length ``n``.

    ``pattern1`` masks first-encoder parity over source positions;
    ``pattern2`` masks second-encoder parity over interleaved slots.  The
    result is deterministic in (n, patterns, seed).
    """
    if len(pattern1) != n or len(pattern2) != n:
        raise ValueError("pattern lengths must equal the block length")
    rng = PortableRng(seed)

    group1 = np.flatnonzero(pattern1.mask == 1)
    group2 = np.flatnonzero(pattern1.mask == 0)
    group1 = group1[rng.derive(_STREAM_GROUP1).permutation(group1.size)]
    group2 = group2[rng.derive(_STREAM_GROUP2).permutation(group2.size)]

    # Shuffle the slot pools as well, so each group lands on a uniformly
    # random subset of its preferred slots rather than the lowest indices.
    slots_punct = np.flatnonzero(pattern2.mask == 0)
    slots_sent = np.flatnonzero(pattern2.mask == 1)
    slots_punct = slots_punct[rng.derive(_STREAM_SLOTS_PUNCT).permutation(slots_punct.size)]
    slots_sent = slots_sent[rng.derive(_STREAM_SLOTS_SENT).permutation(slots_sent.size)]

    n1 = min(group1.size, slots_punct.size)
    n2 = min(group2.size, slots_sent.size)
    forward = np.full(n, -1, dtype=np.int64)
    forward[slots_punct[:n1]] = group1[:n1]
    forward[slots_sent[:n2]] = group2[:n2]

    # Overflow of one group (when counts don't balance) lands on whatever
    # slots remain; both sides are already shuffled.
    rest_pos = np.concatenate([group1[n1:], group2[n2:]])
    rest_slot = np.concatenate([slots_punct[n1:], slots_sent[n2:]])
    if rest_pos.size:
        forward[rest_slot] = rest_pos

    return Permutation(forward=forward, seed=seed, group_boundary=int(group1.size))


def apply(perm: Permutation, block):
    """Permute ``block``: output[j] = block[forward[j]]."""
    arr = np.asarray(block)
    if arr.shape[0] != len(perm):
        raise ValueError(f"block length {arr.shape[0]} != permutation length {len(perm)}")
    return arr[perm.forward]


def apply_inverse(perm: Permutation, block):
    """Undo ``apply``: apply_inverse(perm, apply(perm, x)) == x."""
    arr = np.asarray(block)
    if arr.shape[0] != len(perm):
        raise ValueError(f"block length {arr.shape[0]} != permutation length {len(perm)}")
    return arr[perm.inverse]
