"""Quantization of correlated Gaussians into binary slices.

Each of Alice's samples is mapped to one of 2^m cells; bit i of the cell
label (least significant bit first) forms slice S_i, so slice 1 carries the
finest, most error-prone detail and is corrected first.  Bob estimates each
slice from his noisy samples by per-bit MAP over the cells consistent with
the slices already corrected, which is why his error rates drop steeply with
the slice index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri


def equiprobable_boundaries(m: int) -> tuple[float, ...]:
    """2^m - 1 standard-normal quantiles giving equal cell probabilities."""
    cells = 1 << m
    return tuple(float(ndtri(k / cells)) for k in range(1, cells))


@dataclass(frozen=True)
class SliceConfig:
    """Slice count, cell boundaries, and Bob's relative noise level."""

    m: int = 5
    boundaries: tuple[float, ...] = None  # default: equiprobable cells
    noise_sigma: float = 0.1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        if self.boundaries is None:
            object.__setattr__(self, "boundaries", equiprobable_boundaries(self.m))
        b = np.asarray(self.boundaries, dtype=float)
        if b.size != (1 << self.m) - 1:
            raise ValueError(f"need {(1 << self.m) - 1} boundaries for m={self.m}")
        if np.any(np.diff(b) <= 0.0):
            raise ValueError("boundaries must be strictly increasing")

    @property
    def num_cells(self) -> int:
        return 1 << self.m


@dataclass
class SliceSet:
    """Alice's slices, Bob's estimates, and the per-slice error rates."""

    slices: np.ndarray  # (m, l) uint8
    estimates: np.ndarray  # (m, l) uint8
    ber: tuple[float, ...]

    def __post_init__(self):
        self.slices = np.asarray(self.slices, dtype=np.uint8)
        self.estimates = np.asarray(self.estimates, dtype=np.uint8)
        if self.slices.shape != self.estimates.shape:
            raise ValueError("slices and estimates must have the same shape")
        if len(self.ber) != self.slices.shape[0]:
            raise ValueError("need one error rate per slice")

    @property
    def num_slices(self) -> int:
        return self.slices.shape[0]

    @property
    def length(self) -> int:
        return self.slices.shape[1]


def cell_labels(samples, config: SliceConfig) -> np.ndarray:
    """Cell index per sample: the count of boundaries at or below the value."""
    x = np.asarray(samples, dtype=float)
    return np.searchsorted(np.asarray(config.boundaries), x, side="right").astype(np.int64)


def slices_from_labels(labels: np.ndarray, m: int) -> np.ndarray:
    """(m, l) slice bits; slice i is bit i-1 of the label."""
    labels = np.asarray(labels, dtype=np.int64)
    return np.stack([((labels >> i) & 1).astype(np.uint8) for i in range(m)])


def labels_from_slices(slices: np.ndarray) -> np.ndarray:
    """Inverse of ``slices_from_labels``."""
    slices = np.asarray(slices, dtype=np.int64)
    weights = (1 << np.arange(slices.shape[0], dtype=np.int64))[:, None]
    return (slices * weights).sum(axis=0)


def quantize(x_samples, config: SliceConfig) -> np.ndarray:
    """Alice's m slices for a batch of samples, shape (m, l)."""
    return slices_from_labels(cell_labels(x_samples, config), config.m)


def _cell_weights(y: np.ndarray, config: SliceConfig) -> np.ndarray:
    """Posterior cell weights (cells, l) for unit-variance signal plus
    independent Gaussian noise of sd noise_sigma.

    The product of the signal prior and the noise likelihood is itself
    Gaussian in x, so each cell's weight is a difference of normal CDFs at
    the posterior location/scale.
    """
    sigma = config.noise_sigma
    var = 1.0 + sigma * sigma
    mu = y / var
    s = sigma / np.sqrt(var)
    edges = np.concatenate(([-np.inf], np.asarray(config.boundaries), [np.inf]))
    z = (edges[:, None] - mu[None, :]) / s
    cdf = ndtr(z)
    return np.diff(cdf, axis=0)


def estimate_slice(
    y_samples,
    slice_index: int,
    corrected_lower,
    config: SliceConfig,
) -> np.ndarray:
    """Bob's MAP estimate of slice ``slice_index`` (1-based).

    ``corrected_lower`` holds the slice_index - 1 already-corrected slices,
    each of length l; the estimate maximizes the posterior bit probability
    over the cells consistent with them.
    """
    y = np.asarray(y_samples, dtype=float)
    lower = [np.asarray(s, dtype=np.uint8) for s in corrected_lower]
    if len(lower) != slice_index - 1:
        raise ValueError(
            f"slice {slice_index} needs {slice_index - 1} corrected lower slices, got {len(lower)}"
        )
    if not 1 <= slice_index <= config.m:
        raise ValueError(f"slice index {slice_index} outside [1, {config.m}]")
    for s in lower:
        if s.size != y.size:
            raise ValueError("corrected slice length mismatch")

    if config.noise_sigma == 0.0:
        return quantize(y, config)[slice_index - 1]

    known = np.zeros(y.size, dtype=np.int64)
    for j, s in enumerate(lower):
        known |= s.astype(np.int64) << j
    low_mask = (1 << (slice_index - 1)) - 1
    bit_pos = slice_index - 1

    weights = _cell_weights(y, config)
    acc0 = np.zeros(y.size)
    acc1 = np.zeros(y.size)
    for c in range(config.num_cells):
        sel = (c & low_mask) == known  # (l,) bool
        if not sel.any():
            continue
        target = acc1 if (c >> bit_pos) & 1 else acc0
        target += np.where(sel, weights[c], 0.0)

    est = (acc1 > acc0).astype(np.uint8)

    # Deep in the tails both accumulators can underflow to zero; fall back to
    # the consistent cell nearest the posterior mean.
    dead = (acc0 == 0.0) & (acc1 == 0.0)
    if dead.any():
        est[dead] = _nearest_consistent_bit(
            y[dead], known[dead], low_mask, bit_pos, config
        )
    return est


def _nearest_consistent_bit(y, known, low_mask, bit_pos, config) -> np.ndarray:
    var = 1.0 + config.noise_sigma ** 2
    mu = y / var
    edges = np.concatenate(([-np.inf], np.asarray(config.boundaries), [np.inf]))
    best_bit = np.zeros(y.size, dtype=np.uint8)
    best_dist = np.full(y.size, np.inf)
    for c in range(config.num_cells):
        sel = (c & low_mask) == known
        if not sel.any():
            continue
        lo, hi = edges[c], edges[c + 1]
        dist = np.maximum(lo - mu, 0.0) + np.maximum(mu - hi, 0.0)
        better = sel & (dist < best_dist)
        best_dist[better] = dist[better]
        best_bit[better] = (c >> bit_pos) & 1
    return best_bit


def slice_bit_llrs(
    y_samples,
    slice_index: int,
    corrected_lower,
    config: SliceConfig,
    clip: float = 50.0,
) -> np.ndarray:
    """Optional soft output: log P(bit=1)/P(bit=0) per sample for one slice."""
    y = np.asarray(y_samples, dtype=float)
    lower = [np.asarray(s, dtype=np.uint8) for s in corrected_lower]
    if len(lower) != slice_index - 1:
        raise ValueError("corrected_lower must hold slice_index - 1 slices")
    known = np.zeros(y.size, dtype=np.int64)
    for j, s in enumerate(lower):
        known |= s.astype(np.int64) << j
    low_mask = (1 << (slice_index - 1)) - 1
    bit_pos = slice_index - 1
    weights = _cell_weights(y, config)
    acc0 = np.zeros(y.size)
    acc1 = np.zeros(y.size)
    for c in range(config.num_cells):
        sel = (c & low_mask) == known
        target = acc1 if (c >> bit_pos) & 1 else acc0
        target += np.where(sel, weights[c], 0.0)
    tiny = np.finfo(float).tiny
    llr = np.log(np.maximum(acc1, tiny)) - np.log(np.maximum(acc0, tiny))
    return np.clip(llr, -clip, clip)


def empirical_entropy(labels, m: int) -> float:
    """Plug-in Shannon entropy of the cell labels, in total bits (l * H)."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        return 0.0
    if labels.min() < 0 or labels.max() >= (1 << m):
        raise ValueError(f"labels outside [0, 2^{m})")
    counts = np.bincount(labels, minlength=1 << m)
    p = counts[counts > 0] / labels.size
    return float(labels.size * -(p * np.log2(p)).sum())


def build_slice_set(x_samples, y_samples, config: SliceConfig) -> SliceSet:
    """Quantize Alice's samples and estimate every slice sequentially.

    Estimation of slice i conditions on Alice's slices below i; after exact
    reconciliation of each slice those are identical to Bob's corrected
    slices, so this matches the protocol's sequential behavior.
    """
    x = np.asarray(x_samples, dtype=float)
    y = np.asarray(y_samples, dtype=float)
    if x.size != y.size:
        raise ValueError("sample arrays must have equal length")
    slices = quantize(x, config)
    estimates = np.empty_like(slices)
    ber = []
    lower: list[np.ndarray] = []
    for i in range(1, config.m + 1):
        est = estimate_slice(y, i, lower, config)
        estimates[i - 1] = est
        ber.append(float(np.count_nonzero(est != slices[i - 1]) / x.size))
        lower.append(slices[i - 1])
    return SliceSet(slices=slices, estimates=estimates, ber=tuple(ber))
