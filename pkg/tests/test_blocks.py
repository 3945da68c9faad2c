import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blockmax.blocks import block_maxima, sliding_max, standardize
from blockmax.evd import NormingSequence


def naive_sliding(x, r):
    return np.array([x[i : i + r].max() for i in range(len(x) - r + 1)])


def test_sliding_small():
    np.testing.assert_array_equal(sliding_max([3, 1, 4, 1, 5], 2), [3, 4, 4, 5])


def test_sliding_r1_identity():
    x = np.random.default_rng(0).normal(size=37)
    np.testing.assert_array_equal(sliding_max(x, 1), x)


def test_sliding_random_vs_naive():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        n = int(rng.integers(1, 120))
        r = int(rng.integers(1, n + 1))
        x = rng.integers(-5, 6, size=n).astype(float) if rng.random() < 0.5 else rng.normal(size=n)
        np.testing.assert_array_equal(sliding_max(x, r), naive_sliding(x, r))


@pytest.mark.parametrize("r", [0, 6])
def test_sliding_bad_r(r):
    with pytest.raises(ValueError):
        sliding_max(np.arange(5.0), r)


def test_operation_count():
    rng = np.random.default_rng(2)
    for x in (rng.normal(size=2000), np.arange(2000.0), np.arange(2000.0)[::-1], np.zeros(2000)):
        for r in (1, 2, 17, 500, 2000):
            ops = []
            sliding_max(x, r, counter=ops)
            assert ops[0] <= 2 * x.size


@given(arrays(np.float64, st.integers(1, 60), elements=st.floats(-100, 100)), st.data())
@settings(max_examples=300, deadline=None)
def test_time_reversal(x, data):
    r = data.draw(st.integers(1, x.size))
    np.testing.assert_array_equal(sliding_max(x, r)[::-1], sliding_max(x[::-1], r))


@given(arrays(np.float64, st.integers(1, 80), elements=st.floats(-100, 100)), st.data())
@settings(max_examples=300, deadline=None)
def test_disjoint_is_sliding_subsample(x, data):
    r = data.draw(st.integers(1, x.size))
    s = block_maxima(x, r, "sliding")
    d = block_maxima(x, r, "disjoint")
    np.testing.assert_array_equal(s.maxima[d.starts], d.maxima)


def test_block_counts_and_starts():
    x = np.arange(6.0)
    d = block_maxima(x, 3, "disjoint")
    s = block_maxima(x, 3, "sliding")
    assert d.n_blocks == 2 and list(d.starts) == [0, 3]
    assert s.n_blocks == 4 and list(s.starts) == [0, 1, 2, 3]
    np.testing.assert_array_equal(d.maxima[:, 0], [2, 5])


def test_trailing_partial_block_dropped():
    d = block_maxima(np.arange(7.0), 3, "disjoint")
    assert d.n_blocks == 2
    assert d.maxima.max() == 5.0


def test_multivariate_brute_force():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(500, 2))
    for mode in ("disjoint", "sliding"):
        s = block_maxima(x, 90, mode)
        ref = np.array([x[i : i + 90].max(axis=0) for i in s.starts])
        np.testing.assert_array_equal(s.maxima, ref)


def test_block_maxima_errors():
    with pytest.raises(ValueError):
        block_maxima(np.arange(5.0), 6, "sliding")
    with pytest.raises(ValueError):
        block_maxima(np.arange(5.0), 2, "overlapping")
    with pytest.raises(ValueError):
        block_maxima([1.0, np.nan, 2.0], 2, "sliding")


class TestStandardize:
    def test_identity(self):
        s = block_maxima(np.arange(10.0), 3, "sliding")
        z = standardize(s, NormingSequence([1.0], [0.0], 3))
        np.testing.assert_array_equal(z.maxima, s.maxima)

    def test_affine(self):
        s = block_maxima(np.array([5.0, 1.0]), 2, "disjoint")
        z = standardize(s, NormingSequence([2.0], [3.0], 2))
        assert z.maxima[0, 0] == 1.0

    def test_round_trip(self):
        rng = np.random.default_rng(4)
        s = block_maxima(rng.normal(size=(300, 2)), 7, "sliding")
        z = standardize(s, NormingSequence([0.3, 4.0], [-1.0, 2.5], 7))
        np.testing.assert_allclose(z.unstandardize().maxima, s.maxima, rtol=1e-12, atol=1e-12)

    def test_mismatch(self):
        s = block_maxima(np.arange(10.0), 3, "sliding")
        with pytest.raises(ValueError):
            standardize(s, NormingSequence([1.0], [0.0], 4))
        s2 = block_maxima(np.zeros((10, 2)), 3, "sliding")
        with pytest.raises(ValueError):
            standardize(s2, NormingSequence([1.0, 1.0, 1.0], [0.0, 0.0, 0.0], 3))
