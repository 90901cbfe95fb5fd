"""Log-domain symbol MAP (BCJR) decoding and the two-decoder iterative loop.

Soft values for the duo-binary code are length-4 log-probability vectors per
trellis section, normalized so the maximum entry is 0 (entry order: symbol
0..3, symbol = 2*b0 + b1 with b0 the first bit of the pair).  Sequences of
such vectors are plain (K, 4) float arrays.  Per-bit values are scalar
log-likelihood ratios log P(bit=1)/P(bit=0).

The trellis is open at both ends: forward and backward recursions start from
uniform state metrics, which is the right model here because the encoder
state is never terminated and blocks are long.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .interleave import Permutation, apply, apply_inverse
from .puncture import PuncturePattern
from .trellis import TransitionTable

NEG_INF = float("-inf")
_NEG = -1.0e30  # finite stand-in for log(0) inside kernels


@dataclass(frozen=True)
class DecoderConfig:
    """Iterative decoder knobs.

    llr_clip is the magnitude L assigned to perfectly known bits and used to
    clip exchanged per-bit values; normalized symbol vectors are floored at
    -4L.  The extrinsic weights scale what one decoder passes to the other,
    per trellis section, depending on whether that section had any of its
    parity bits received (a punctured section's extrinsic is less reliable).
    """

    iterations: int = 18
    llr_clip: float = 25.0
    extrinsic_weight_punctured: float = 0.9
    extrinsic_weight_received: float = 1.0
    early_stop: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.extrinsic_weight_punctured <= 1.0:
            raise ValueError("extrinsic_weight_punctured must be in (0, 1]")
        if not 0.0 < self.extrinsic_weight_received <= 1.0:
            raise ValueError("extrinsic_weight_received must be in (0, 1]")
        if self.llr_clip <= 0.0:
            raise ValueError("llr_clip must be positive")


def max_star(a: float, b: float) -> float:
    """Jacobian logarithm ln(e^a + e^b), exact to floating precision."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


@njit(cache=True)
def _max_star_nb(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    d = a - b
    if d > 60.0:  # exp underflows anyway
        return a
    return a + np.log1p(np.exp(-d))


@njit(cache=True)
def _bcjr_kernel(gamma, next_state, floor_val):
    """Forward/backward recursions over full branch metrics.

    gamma: (K, S, 4) branch metric for (section, state, symbol), already
    including prior + systematic + parity contributions.  Returns the
    normalized per-section symbol posterior (K, 4), entries floored at
    floor_val.  Boundary metrics are uniform at both ends.
    """
    K, S, M = gamma.shape
    alpha = np.zeros((K + 1, S))
    post = np.empty((K, M))

    for k in range(K):
        nxt = np.full(S, _NEG)
        for s in range(S):
            a = alpha[k, s]
            for m in range(M):
                t = next_state[s, m]
                v = a + gamma[k, s, m]
                if nxt[t] <= _NEG:
                    nxt[t] = v
                else:
                    nxt[t] = _max_star_nb(nxt[t], v)
        mx = nxt[0]
        for s in range(1, S):
            if nxt[s] > mx:
                mx = nxt[s]
        for s in range(S):
            alpha[k + 1, s] = nxt[s] - mx

    beta = np.zeros(S)
    for k in range(K - 1, -1, -1):
        pk = np.full(M, _NEG)
        nb = np.full(S, _NEG)
        for s in range(S):
            for m in range(M):
                t = next_state[s, m]
                v = gamma[k, s, m] + beta[t]
                if nb[s] <= _NEG:
                    nb[s] = v
                else:
                    nb[s] = _max_star_nb(nb[s], v)
                w = alpha[k, s] + v
                if pk[m] <= _NEG:
                    pk[m] = w
                else:
                    pk[m] = _max_star_nb(pk[m], w)
        mx = nb[0]
        for s in range(1, S):
            if nb[s] > mx:
                mx = nb[s]
        for s in range(S):
            beta[s] = nb[s] - mx
        mxp = pk[0]
        for m in range(1, M):
            if pk[m] > mxp:
                mxp = pk[m]
        for m in range(M):
            v = pk[m] - mxp
            post[k, m] = v if v > floor_val else floor_val
    return post


def normalize_symbol_llrs(values: np.ndarray, floor: float = -100.0) -> np.ndarray:
    """Shift each length-4 row to max 0 and floor the rest."""
    v = np.asarray(values, dtype=float)
    out = v - v.max(axis=-1, keepdims=True)
    return np.maximum(out, floor)


def bit_llrs_to_symbols(llr_b0: np.ndarray, llr_b1: np.ndarray) -> np.ndarray:
    """Per-section symbol vectors from independent per-bit LLRs."""
    K = llr_b0.shape[0]
    out = np.zeros((K, 4))
    out[:, 1] = llr_b1
    out[:, 2] = llr_b0
    out[:, 3] = llr_b0 + llr_b1
    return normalize_symbol_llrs(out)


def symbol_llrs_to_bits(sym: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Marginal per-bit LLRs (first bit, second bit) of symbol vectors."""
    llr_b0 = np.logaddexp(sym[:, 2], sym[:, 3]) - np.logaddexp(sym[:, 0], sym[:, 1])
    llr_b1 = np.logaddexp(sym[:, 1], sym[:, 3]) - np.logaddexp(sym[:, 0], sym[:, 2])
    return llr_b0, llr_b1


def bcjr_decode(
    systematic_llrs: np.ndarray,
    parity_llrs: np.ndarray,
    priors: np.ndarray,
    table: TransitionTable,
    llr_floor: float = -100.0,
) -> tuple[np.ndarray, np.ndarray]:
    """One constituent Log-MAP pass.

    systematic_llrs and priors are (K, 4) symbol vectors; parity_llrs is the
    length-2K per-bit LLR stream of this encoder's parity (0 where
    punctured).  Returns (extrinsic, posterior), both (K, 4) normalized.
    The posterior decomposes additively: posterior = prior + systematic +
    extrinsic up to the common normalizer.
    """
    systematic_llrs = np.asarray(systematic_llrs, dtype=float)
    priors = np.asarray(priors, dtype=float)
    parity_llrs = np.asarray(parity_llrs, dtype=float)
    K = systematic_llrs.shape[0]
    if priors.shape != (K, 4) or systematic_llrs.shape != (K, 4):
        raise ValueError("systematic and prior sequences must both be (K, 4)")
    if parity_llrs.shape != (2 * K,):
        raise ValueError(f"parity stream must hold 2K={2*K} bit LLRs")

    p0 = ((table.parity >> 1) & 1).astype(float)  # (S, 4)
    p1 = (table.parity & 1).astype(float)
    lp0 = parity_llrs[0::2]
    lp1 = parity_llrs[1::2]
    gamma = (
        (systematic_llrs + priors)[:, None, :]
        + lp0[:, None, None] * p0[None, :, :]
        + lp1[:, None, None] * p1[None, :, :]
    )
    post = _bcjr_kernel(gamma, table.next_state.astype(np.int64), float(llr_floor))
    extrinsic = normalize_symbol_llrs(post - priors - systematic_llrs, llr_floor)
    return extrinsic, post


def weight_extrinsic(
    extrinsic: np.ndarray,
    received_mask: np.ndarray,
    config: DecoderConfig,
) -> np.ndarray:
    """Scale per-section extrinsic vectors by the received/punctured weight."""
    extrinsic = np.asarray(extrinsic, dtype=float)
    received_mask = np.asarray(received_mask)
    if received_mask.shape[0] != extrinsic.shape[0]:
        raise ValueError("mask length must equal the number of sections")
    w = np.where(
        received_mask.astype(bool),
        config.extrinsic_weight_received,
        config.extrinsic_weight_punctured,
    )
    return normalize_symbol_llrs(extrinsic * w[:, None], -4.0 * config.llr_clip)


def _parity_bit_llrs(n: int, parity_bits: np.ndarray, pattern: PuncturePattern,
                     clip: float) -> np.ndarray:
    llrs = np.zeros(n)
    pos = np.flatnonzero(pattern.mask == 1)
    if pos.size != parity_bits.shape[0]:
        raise ValueError("parity bit count does not match pattern")
    llrs[pos] = (2.0 * parity_bits.astype(float) - 1.0) * clip
    return llrs


def _section_received_mask(mask: np.ndarray) -> np.ndarray:
    return (mask[0::2] | mask[1::2]).astype(bool)


def turbo_decode(
    y_bits,
    e: float,
    parity1,
    pattern1: PuncturePattern,
    parity2,
    pattern2: PuncturePattern,
    perm: Permutation,
    table: TransitionTable,
    config: DecoderConfig = DecoderConfig(),
) -> tuple[np.ndarray, bool, int]:
    """Iterative two-decoder recovery of x from side information y.

    y is modeled as x through a binary symmetric channel with crossover e;
    parity1/parity2 are the surviving parity bits of the natural-order and
    interleaved encoders.  Runs up to config.iterations rounds (decoder 1
    then decoder 2 per round), stopping early once hard decisions are stable
    across two consecutive rounds.  Returns (x_hat, converged,
    iterations_used).
    """
    if not 0.0 < e < 0.5:
        raise ValueError(f"crossover probability {e} outside (0, 0.5)")
    y = np.asarray(y_bits, dtype=np.uint8).ravel()
    n = y.size
    if n % 2:
        raise ValueError("block length must be even")
    if len(pattern1) != n or len(pattern2) != n or len(perm) != n:
        raise ValueError("pattern/permutation lengths must equal the block length")

    clip = config.llr_clip
    floor = -4.0 * clip
    lam_sys = (2.0 * y.astype(float) - 1.0) * math.log((1.0 - e) / e)
    lam_sys_perm = apply(perm, lam_sys)

    lp1 = _parity_bit_llrs(n, np.asarray(parity1, dtype=np.uint8), pattern1, clip)
    lp2 = _parity_bit_llrs(n, np.asarray(parity2, dtype=np.uint8), pattern2, clip)
    sec1 = _section_received_mask(pattern1.mask)
    sec2 = _section_received_mask(pattern2.mask)

    sys1 = bit_llrs_to_symbols(lam_sys[0::2], lam_sys[1::2])
    sys2 = bit_llrs_to_symbols(lam_sys_perm[0::2], lam_sys_perm[1::2])

    # Per-section weights broadcast to the two bits of each section.
    w1 = np.repeat(np.where(sec1, config.extrinsic_weight_received,
                            config.extrinsic_weight_punctured), 2)
    w2 = np.repeat(np.where(sec2, config.extrinsic_weight_received,
                            config.extrinsic_weight_punctured), 2)

    def marginal_bits(sym: np.ndarray) -> np.ndarray:
        b0, b1 = symbol_llrs_to_bits(sym)
        out = np.empty(n)
        out[0::2] = b0
        out[1::2] = b1
        return out

    ext2_nat = np.zeros(n)  # decoder-2 extrinsic, natural bit order
    x_hat = y.copy()
    prev = None
    converged = False
    iterations_used = 0

    for it in range(1, config.iterations + 1):
        # Bit-level exchange: each decoder passes its marginal posterior
        # minus that bit's own prior and systematic input, scaled by the
        # received/punctured weight of the section that produced it.
        prior1_bits = ext2_nat
        prior1 = bit_llrs_to_symbols(prior1_bits[0::2], prior1_bits[1::2])
        _, post1 = bcjr_decode(sys1, lp1, prior1, table, floor)
        ext1 = (marginal_bits(post1) - prior1_bits - lam_sys) * w1
        np.clip(ext1, -clip, clip, out=ext1)

        prior2_bits = apply(perm, ext1)
        prior2 = bit_llrs_to_symbols(prior2_bits[0::2], prior2_bits[1::2])
        _, post2 = bcjr_decode(sys2, lp2, prior2, table, floor)
        post2_bits = marginal_bits(post2)
        ext2 = (post2_bits - prior2_bits - lam_sys_perm) * w2
        np.clip(ext2, -clip, clip, out=ext2)
        ext2_nat = apply_inverse(perm, ext2)

        x_hat = (apply_inverse(perm, post2_bits) > 0.0).astype(np.uint8)

        iterations_used = it
        if prev is not None and np.array_equal(prev, x_hat):
            converged = True
            if config.early_stop:
                break
        prev = x_hat

    return x_hat, converged, iterations_used
