"""Turbo-coded side-information coding and sliced reconciliation for CV-QKD."""

from .cascade import CascadeConfig, CascadeTranscript, binary_search_correct, cascade_run, leakage_bits
from .interleave import Permutation, apply, apply_inverse, build_interleaver
from .ledger import (
    Method,
    ReconcileConfig,
    ReconciliationReport,
    SliceOutcome,
    StrategyThresholds,
    reconcile_all,
    select_strategy,
)
from .puncture import (
    PuncturePattern,
    RatePolicy,
    binary_entropy,
    build_pattern,
    build_pattern_from_count,
    rate_for_ber,
)
from .rng import PortableRng
from .siso import DecoderConfig, bcjr_decode, max_star, turbo_decode, weight_extrinsic
from .slicing import (
    SliceConfig,
    SliceSet,
    build_slice_set,
    empirical_entropy,
    estimate_slice,
    quantize,
)
from .sw_codec import (
    SwEncoding,
    encoding_from_bytes,
    encoding_to_bytes,
    sw_decode,
    sw_encode,
    verify,
)
from .trellis import DEFAULT_SPEC, TransitionTable, TrellisSpec, build_transition_table, encode_block

__version__ = "0.1.0"
