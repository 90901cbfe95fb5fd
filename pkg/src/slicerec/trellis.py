"""Recursive systematic convolutional constituent code and its trellis tables.

The constituent code is a memory-4 (16-state) recursive systematic
convolutional encoder with octal generators (23, 35).  Polynomials are read
most-significant-bit first as delay taps D^0..D^memory: for the feedback
polynomial 23 (10011b) the register recursion is

    w[k] = u[k] ^ w[k-3] ^ w[k-4]

and for the feedforward polynomial 35 (11101b) the parity output is

    p[k] = w[k] ^ w[k-1] ^ w[k-2] ^ w[k-4].

Written as polynomials in x with bit i of the octal value the coefficient of
x^i, these are x^4+x+1 (primitive) and x^4+x^3+x^2+1.  The encoder state
packs the register contents (w[k-1], ..., w[k-4]) with the newest bit in the
most significant position.

The code consumes input bits in pairs: one trellis section is the
composition of two elementary single-bit steps, so a section maps
(state, 2-bit symbol) to (next state, 2-bit parity pair).  Symbols and
parity pairs are packed first-bit-high: symbol = 2*b0 + b1 where b0 is
consumed first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class TrellisSpec:
    """Generator description of the constituent code."""

    feedback_poly: int = 0o23
    feedforward_poly: int = 0o35
    memory: int = 4
    num_states: int = 16
    symbol_arity: int = 4

    def validate(self) -> None:
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        if self.num_states != 1 << self.memory:
            raise ValueError(
                f"num_states must be 2**memory = {1 << self.memory}, got {self.num_states}"
            )
        if self.symbol_arity != 4:
            raise ValueError("trellis sections consume bit pairs; symbol_arity must be 4")
        for name, poly in (
            ("feedback_poly", self.feedback_poly),
            ("feedforward_poly", self.feedforward_poly),
        ):
            if poly <= 0 or (poly & 1) == 0:
                raise ValueError(f"{name} must have constant term 1, got {poly:#o}")
            if poly.bit_length() - 1 > self.memory:
                raise ValueError(
                    f"{name} degree {poly.bit_length() - 1} exceeds memory {self.memory}"
                )
        # The input tap closes on D^0 = the polynomial's top bit; without it
        # the recursion would ignore the input entirely.
        if not (self.feedback_poly >> self.memory) & 1:
            raise ValueError("feedback_poly must have degree exactly equal to memory")


DEFAULT_SPEC = TrellisSpec()


@dataclass
class TransitionTable:
    """Precomputed per-section (and per-bit) transition structure.

    All arrays are read-only.  ``next_state[s, sym]`` and ``parity[s, sym]``
    describe one duo-binary section; ``bit_next``/``bit_parity`` describe one
    elementary single-bit step and are what ``next_state``/``parity`` are
    composed from.
    """

    spec: TrellisSpec
    next_state: np.ndarray  # (num_states, 4) int16
    parity: np.ndarray  # (num_states, 4) int16, packed 2*p0 + p1
    bit_next: np.ndarray  # (num_states, 2) int16
    bit_parity: np.ndarray  # (num_states, 2) int16


def _bit_step(state: int, bit: int, spec: TrellisSpec) -> tuple[int, int]:
    """One elementary shift-register step: returns (next_state, parity_bit)."""
    m = spec.memory
    w = ((spec.feedback_poly & ((bit << m) | state)).bit_count()) & 1
    p = ((spec.feedforward_poly & ((w << m) | state)).bit_count()) & 1
    nxt = (w << (m - 1)) | (state >> 1)
    return nxt, p


@lru_cache(maxsize=8)
def _bit_tables(spec: TrellisSpec) -> tuple[tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]]:
    spec.validate()
    nxt = []
    par = []
    for s in range(spec.num_states):
        row_n, row_p = [], []
        for b in (0, 1):
            n, p = _bit_step(s, b, spec)
            row_n.append(n)
            row_p.append(p)
        nxt.append(tuple(row_n))
        par.append(tuple(row_p))
    return tuple(nxt), tuple(par)


def build_transition_table(spec: TrellisSpec = DEFAULT_SPEC) -> TransitionTable:
    """Tabulate all (state, symbol) section transitions for ``spec``.

    Raises ValueError for malformed polynomials (degree above memory, zero
    constant term) or inconsistent state counts.
    """
    bit_next, bit_parity = _bit_tables(spec)
    n_states = spec.num_states
    next_state = np.empty((n_states, 4), dtype=np.int16)
    parity = np.empty((n_states, 4), dtype=np.int16)
    for s in range(n_states):
        for sym in range(4):
            b0, b1 = sym >> 1, sym & 1
            s1 = bit_next[s][b0]
            p0 = bit_parity[s][b0]
            s2 = bit_next[s1][b1]
            p1 = bit_parity[s1][b1]
            next_state[s, sym] = s2
            parity[s, sym] = (p0 << 1) | p1
    bn = np.array(bit_next, dtype=np.int16)
    bp = np.array(bit_parity, dtype=np.int16)
    for arr in (next_state, parity, bn, bp):
        arr.setflags(write=False)
    return TransitionTable(spec=spec, next_state=next_state, parity=parity,
                           bit_next=bn, bit_parity=bp)


def encode_block(
    bits,
    spec: TrellisSpec = DEFAULT_SPEC,
    initial_state: int = 0,
) -> tuple[np.ndarray, int]:
    """Encode a block, returning only the parity stream.

    ``bits`` must have even length (the trellis consumes pairs).  Parity bit
    i is the feedforward output of the elementary step consuming input bit i;
    the systematic bits are not returned since the caller already holds them.
    The trellis is left open (no termination tail).
    """
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size % 2:
        raise ValueError(f"block length must be even, got {arr.size}")
    if not 0 <= initial_state < spec.num_states:
        raise ValueError(f"initial_state {initial_state} outside [0, {spec.num_states})")
    bit_next, bit_parity = _bit_tables(spec)
    out = np.empty(arr.size, dtype=np.uint8)
    s = initial_state
    for i, b in enumerate(arr.tolist()):
        out[i] = bit_parity[s][b]
        s = bit_next[s][b]
    return out, s
