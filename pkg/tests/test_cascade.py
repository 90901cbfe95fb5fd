import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slicerec.cascade import (
    CascadeConfig,
    CascadeTranscript,
    InProcessChannel,
    binary_search_correct,
    cascade_run,
    leakage_bits,
)
from slicerec.puncture import binary_entropy
from slicerec.rng import PortableRng


def test_equal_strings_disclose_top_level_only():
    l = 1024
    bits = PortableRng(1).bernoulli(l, 0.5)
    cfg = CascadeConfig()
    corrected, tr = cascade_run(bits, bits, 0.01, cfg, seed=5)
    assert np.array_equal(corrected, bits)
    assert not tr.corrected_positions
    expected = sum(math.ceil(l / k) for k in cfg.block_sizes(l, 0.01))
    assert tr.parities_alice == tr.parities_bob == len(tr.subsets) == expected


def test_planted_single_error_pass1_cost():
    # k1 = 8 blocks: the erroneous block costs exactly ceil(log2 8) = 3
    # bisection parities on top of its block parity.
    l = 32
    alice = PortableRng(2).bernoulli(l, 0.5)
    bob = alice.copy()
    bob[13] ^= 1
    cfg = CascadeConfig(passes=1)
    e_est = 0.1  # ceil(0.73 / 0.1) = 8
    assert cfg.block_sizes(l, e_est)[0] == 8
    corrected, tr = cascade_run(alice, bob, e_est, cfg, seed=3)
    assert np.array_equal(corrected, alice)
    assert tr.parities_alice == math.ceil(l / 8) + 3


def test_binary_search_block_of_one():
    alice = np.array([1], dtype=np.uint8)
    bob = np.array([0], dtype=np.uint8)
    pos, used = binary_search_correct([0], alice, bob)
    assert pos == 0 and used == 0
    assert bob[0] == 1


def test_binary_search_block_of_eight():
    alice = np.zeros(8, dtype=np.uint8)
    bob = alice.copy()
    bob[5] ^= 1
    pos, used = binary_search_correct(np.arange(8), alice, bob)
    assert pos == 5 and used == 3
    assert np.array_equal(bob, alice)


def test_binary_search_block_of_seven_uneven_halves():
    alice = np.zeros(7, dtype=np.uint8)
    bob = alice.copy()
    bob[6] ^= 1
    pos, used = binary_search_correct(np.arange(7), alice, bob)
    assert pos == 6 and used == math.ceil(math.log2(7)) == 3


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 64), st.data())
def test_binary_search_cost_bound(size, data):
    err = data.draw(st.integers(0, size - 1))
    alice = np.zeros(size, dtype=np.uint8)
    bob = alice.copy()
    bob[err] ^= 1
    pos, used = binary_search_correct(np.arange(size), alice, bob)
    assert pos == err
    assert used <= math.ceil(math.log2(size)) if size > 1 else used == 0


def test_binary_search_rejects_matching_block():
    bits = np.zeros(4, dtype=np.uint8)
    with pytest.raises(ValueError):
        binary_search_correct(np.arange(4), bits, bits.copy())


def test_leakage_accounting_modes():
    tr = CascadeTranscript(parities_alice=50, parities_bob=50,
                           subsets=[np.arange(3)] * 50)
    assert leakage_bits(tr, "per-party") == 100
    assert leakage_bits(tr, "worst-case-2d") == 100
    assert leakage_bits(CascadeTranscript()) == 0
    with pytest.raises(ValueError):
        leakage_bits(tr, "optimistic")


def test_leakage_reference_scenario():
    # A transcript with d = 0.004*l subsets at l = 10000 charges 2 * 0.004*l.
    l = 10000
    d = int(0.004 * l)
    tr = CascadeTranscript(parities_alice=d, parities_bob=d, subsets=[None] * d)
    assert leakage_bits(tr, "per-party") == 2 * d == 80


def test_transcript_counts_match_channel_messages():
    rng = PortableRng(77)
    alice = rng.derive(1).bernoulli(2048, 0.5)
    bob = alice ^ rng.derive(2).bernoulli(2048, 0.01)
    corrected, tr = cascade_run(alice, bob, 0.01, seed=11)
    # Each subset exchange carries exactly one announcement per party, so the
    # sum of both parties' counts is the number of channel messages.
    channel = InProcessChannel(alice, CascadeTranscript())
    for sub in tr.subsets:
        channel.exchange_parity(sub, 0)
    assert channel.messages == tr.parities_alice + tr.parities_bob
    assert np.array_equal(corrected, alice)


def test_corrections_are_real_errors_covered_by_subsets():
    rng = PortableRng(13)
    alice = rng.derive(1).bernoulli(4096, 0.5)
    bob = alice ^ rng.derive(2).bernoulli(4096, 0.005)
    corrected, tr = cascade_run(alice, bob, 0.005, seed=1)
    assert np.array_equal(corrected, alice)
    errors = set(np.flatnonzero(alice != bob).tolist())
    assert len(tr.corrected_positions) == len(set(tr.corrected_positions))
    assert set(tr.corrected_positions) == errors
    # Every correction is preceded by a disclosed subset containing it.
    seen: set[int] = set()
    remaining = list(tr.corrected_positions)
    for sub in tr.subsets:
        seen.update(int(p) for p in sub)
        while remaining and remaining[0] in seen:
            remaining.pop(0)
    assert not remaining


def test_completeness_and_even_error_survivors():
    """1000 trials at l=4096: residual errors in at most 1%, and any failure
    leaves an even number of errors in every block of every pass."""
    l = 4096
    cfg = CascadeConfig()
    failures = 0
    trials = 0
    for e in (0.001, 0.005, 0.01):
        base = PortableRng(int(e * 1e6))
        for t in range(334):
            trials += 1
            r = base.derive(t)
            alice = r.derive(1).bernoulli(l, 0.5)
            bob = alice ^ r.derive(2).bernoulli(l, e)
            corrected, tr = cascade_run(alice, bob, e, cfg, seed=r.derive(3).seed)
            residual = np.flatnonzero(corrected != alice)
            if residual.size:
                failures += 1
                seed_rng = PortableRng(r.derive(3).seed)
                for p, k in enumerate(cfg.block_sizes(l, e)):
                    perm = seed_rng.derive(p + 1).permutation(l)
                    err_set = set(residual.tolist())
                    for i in range(0, l, k):
                        block = perm[i:i + k]
                        inside = sum(1 for pos in block if int(pos) in err_set)
                        assert inside % 2 == 0, "odd undetected block should be impossible"
    assert trials == 1002
    assert failures <= 10


def test_efficiency_envelope():
    l = 10000
    cfg = CascadeConfig()
    for e in (0.001, 0.005, 0.01):
        base = PortableRng(int(1 / e))
        ds = []
        for t in range(10):
            r = base.derive(t)
            alice = r.derive(1).bernoulli(l, 0.5)
            bob = alice ^ r.derive(2).bernoulli(l, e)
            _, tr = cascade_run(alice, bob, e, cfg, seed=r.derive(3).seed)
            ds.append(tr.parities_alice)
        d = float(np.mean(ds))
        xi = d / (l * binary_entropy(e)) - 1.0
        print(f"cascade efficiency at e={e}: d={d:.0f}, xi={xi:.3f}")
        assert d <= l * (1.0 + 1.0) * binary_entropy(e)


def test_e_zero_single_cap_block():
    bits = PortableRng(3).bernoulli(64, 0.5)
    cfg = CascadeConfig(passes=2)
    _, tr = cascade_run(bits, bits, 0.0, cfg, seed=0)
    assert tr.parities_alice == sum(math.ceil(64 / k) for k in cfg.block_sizes(64, 0.0))


def test_validation():
    bits = np.zeros(8, dtype=np.uint8)
    with pytest.raises(ValueError):
        cascade_run(bits, bits[:-1], 0.01)
    with pytest.raises(ValueError):
        cascade_run(bits, bits, 0.5)
    with pytest.raises(ValueError):
        CascadeConfig(passes=0)
    with pytest.raises(ValueError):
        CascadeConfig(initial_block_factor=-1.0)
