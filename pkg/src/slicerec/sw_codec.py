"""Side-information codec facade: parity-only encoding and turbo recovery.

Alice encodes her block with the two constituent encoders and transmits only
the punctured parity streams; the permutation and patterns are regenerated
from seeds on the receiving side, modeling a public pre-agreed code
configuration.  Only parity bits count as disclosed information.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .interleave import Permutation, apply, build_interleaver
from .puncture import PuncturePattern, RatePolicy, build_pattern_from_count, rate_for_ber
from .siso import DecoderConfig, turbo_decode
from .trellis import DEFAULT_SPEC, TrellisSpec, build_transition_table, encode_block

_MAGIC = b"SWE1"
_VERSION = 1
_HEADER = struct.Struct("<4sIIfQIIII")


@dataclass
class SwEncoding:
    """Transmitted description of a block: parity bits plus public metadata."""

    parity1: np.ndarray  # uint8, transmitted first-encoder parity bits
    parity2: np.ndarray
    pattern1: PuncturePattern
    pattern2: PuncturePattern
    perm_seed: int
    block_len: int
    e_est: float

    @property
    def disclosed_bits(self) -> int:
        return self.pattern1.transmitted_count + self.pattern2.transmitted_count


def sw_encode(
    x,
    e_est: float,
    seed: int,
    spec: TrellisSpec = DEFAULT_SPEC,
    policy: RatePolicy = RatePolicy(),
) -> SwEncoding:
    """Encode ``x`` to parity bits only, at the rate the policy picks for e_est."""
    x = np.asarray(x, dtype=np.uint8).ravel()
    n = x.size
    if n % 2:
        raise ValueError("block length must be even")
    rate = rate_for_ber(e_est, policy)  # validates e_est
    per_enc = int(np.floor(0.5 * rate * n + 0.5))
    pattern1 = build_pattern_from_count(n, per_enc, 0)
    pattern2 = build_pattern_from_count(n, per_enc, 0)
    perm = build_interleaver(n, pattern1, pattern2, seed)

    par1, _ = encode_block(x, spec)
    par2, _ = encode_block(apply(perm, x), spec)
    return SwEncoding(
        parity1=par1[pattern1.mask == 1],
        parity2=par2[pattern2.mask == 1],
        pattern1=pattern1,
        pattern2=pattern2,
        perm_seed=seed,
        block_len=n,
        e_est=float(e_est),
    )


def regenerate_permutation(enc: SwEncoding) -> Permutation:
    """The interleaver both sides derive from the encoding's public seed."""
    return build_interleaver(enc.block_len, enc.pattern1, enc.pattern2, enc.perm_seed)


def sw_decode(
    y,
    e: float,
    enc: SwEncoding,
    spec: TrellisSpec = DEFAULT_SPEC,
    config: DecoderConfig = DecoderConfig(),
) -> tuple[np.ndarray, bool]:
    """Recover Alice's block from side information ``y`` and parity bits."""
    y = np.asarray(y, dtype=np.uint8).ravel()
    if y.size != enc.block_len:
        raise ValueError(f"side information length {y.size} != block length {enc.block_len}")
    perm = regenerate_permutation(enc)
    table = build_transition_table(spec)
    x_hat, converged, _ = turbo_decode(
        y, e, enc.parity1, enc.pattern1, enc.parity2, enc.pattern2, perm, table, config
    )
    return x_hat, converged


def verify(x_hat, x) -> int:
    """Residual error count (Hamming distance) between decode and truth."""
    a = np.asarray(x_hat, dtype=np.uint8).ravel()
    b = np.asarray(x, dtype=np.uint8).ravel()
    if a.size != b.size:
        raise ValueError("length mismatch")
    return int(np.count_nonzero(a != b))


def encoding_to_bytes(enc: SwEncoding) -> bytes:
    """Serialize: fixed little-endian header, then both parity streams
    bit-packed most-significant-bit first."""
    head = _HEADER.pack(
        _MAGIC,
        _VERSION,
        enc.block_len,
        enc.e_est,
        enc.perm_seed & (1 << 64) - 1,
        enc.pattern1.transmitted_count,
        enc.pattern1.offset,
        enc.pattern2.transmitted_count,
        enc.pattern2.offset,
    )
    b1 = np.packbits(enc.parity1).tobytes()
    b2 = np.packbits(enc.parity2).tobytes()
    return head + b1 + b2


def encoding_from_bytes(buf: bytes) -> SwEncoding:
    if len(buf) < _HEADER.size:
        raise ValueError("buffer shorter than header")
    magic, version, block_len, e_est, seed, c1, o1, c2, o2 = _HEADER.unpack_from(buf)
    if magic != _MAGIC or version != _VERSION:
        raise ValueError("bad magic or version")
    n1 = (c1 + 7) // 8
    n2 = (c2 + 7) // 8
    if len(buf) != _HEADER.size + n1 + n2:
        raise ValueError("buffer length does not match parity counts")
    off = _HEADER.size
    par1 = np.unpackbits(np.frombuffer(buf, np.uint8, n1, off))[:c1]
    par2 = np.unpackbits(np.frombuffer(buf, np.uint8, n2, off + n1))[:c2]
    return SwEncoding(
        parity1=par1,
        parity2=par2,
        pattern1=build_pattern_from_count(block_len, c1, o1),
        pattern2=build_pattern_from_count(block_len, c2, o2),
        perm_seed=seed,
        block_len=block_len,
        e_est=float(e_est),
    )
