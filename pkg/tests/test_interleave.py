import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slicerec.interleave import Permutation, apply, apply_inverse, build_interleaver
from slicerec.puncture import PuncturePattern, build_pattern_from_count


def patterns_case(n, t1, t2, seed):
    p1 = build_pattern_from_count(n, t1, 0)
    p2 = build_pattern_from_count(n, t2, 0)
    return build_interleaver(n, p1, p2, seed), p1, p2


def test_trivial_all_transmitted_is_bijection():
    perm, _, _ = patterns_case(4, 4, 4, 1)
    assert np.array_equal(np.sort(perm.forward), np.arange(4))


def test_small_complementarity_exhaustive():
    # First-encoder parity sent for positions {0,1,2,3}; second-encoder
    # parity sent for slots {0,1,2,3}: every group-1 position must land in
    # slots {4..7}.
    head = np.array([1, 1, 1, 1, 0, 0, 0, 0], dtype=np.uint8)
    p1 = PuncturePattern(mask=head.copy(), transmitted_count=4)
    p2 = PuncturePattern(mask=head.copy(), transmitted_count=4)
    for seed in range(50):
        perm = build_interleaver(8, p1, p2, seed)
        landing = {int(perm.inverse[i]) for i in range(4)}
        assert landing == {4, 5, 6, 7}, f"seed {seed}: group 1 landed on {landing}"


def test_large_bijectivity():
    perm, _, _ = patterns_case(10000, 4600, 4600, 99)
    assert np.array_equal(np.sort(perm.forward), np.arange(10000))
    assert perm.group_boundary == 4600


@settings(max_examples=300, deadline=None)
@given(
    st.integers(2, 128),
    st.integers(0, 128),
    st.integers(0, 128),
    st.integers(0, 2**63 - 1),
)
def test_bijective_and_parity_coverage_minimal(n, t1, t2, seed):
    t1, t2 = min(t1, n), min(t2, n)
    perm, p1, p2 = patterns_case(n, t1, t2, seed)
    assert np.array_equal(np.sort(perm.forward), np.arange(n))
    both = int((p1.mask[perm.forward] & p2.mask).sum())
    neither = int(((1 - p1.mask[perm.forward]) & (1 - p2.mask)).sum())
    assert both == max(0, t1 + t2 - n)
    assert neither == max(0, n - t1 - t2)


def test_determinism():
    a, _, _ = patterns_case(512, 200, 150, 7)
    b, _, _ = patterns_case(512, 200, 150, 7)
    c, _, _ = patterns_case(512, 200, 150, 8)
    assert np.array_equal(a.forward, b.forward)
    assert not np.array_equal(a.forward, c.forward)


def test_apply_identity_permutation():
    perm = Permutation(forward=np.arange(6), seed=0, group_boundary=0)
    block = np.array([5, 4, 3, 2, 1, 0])
    assert np.array_equal(apply(perm, block), block)


def test_apply_direct_indexing():
    perm, _, _ = patterns_case(8, 4, 4, 3)
    block = np.arange(8)
    out = apply(perm, block)
    for j in range(8):
        assert out[j] == block[perm.forward[j]]


@given(st.integers(2, 200), st.integers(0, 2**32))
def test_apply_roundtrip(n, seed):
    perm, _, _ = patterns_case(n, n // 3, n // 2, seed)
    block = np.arange(n) * 3 + 1
    assert np.array_equal(apply_inverse(perm, apply(perm, block)), block)
    assert np.array_equal(apply(perm, apply_inverse(perm, block)), block)


def test_length_mismatches_rejected():
    perm, p1, _ = patterns_case(8, 4, 4, 3)
    with pytest.raises(ValueError):
        apply(perm, np.arange(7))
    with pytest.raises(ValueError):
        apply_inverse(perm, np.arange(9))
    with pytest.raises(ValueError):
        build_interleaver(10, p1, p1, 0)
