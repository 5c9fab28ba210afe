import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import entropy_bits, exhaustive_best_cut, mdl_passes
from xtreeplan.discretizer import FeatureBins, Interval, bin_of, default_min_support, mdlp_bins, shannon_entropy
from xtreeplan.errors import EmptyInput, InputMismatch

F, T = False, True


def test_entropy_examples():
    assert shannon_entropy([T, T, F, F]) == 1.0
    assert shannon_entropy([T, T, T]) == 0.0
    # -(1/4 log2 1/4 + 3/4 log2 3/4)
    assert shannon_entropy([T, F, F, F]) == pytest.approx(0.8113, abs=1e-4)
    assert shannon_entropy([T, F, F, F]) == pytest.approx(entropy_bits([T, F, F, F]), abs=1e-15)


def test_entropy_empty():
    with pytest.raises(EmptyInput):
        shannon_entropy([])


@given(st.lists(st.booleans(), min_size=1, max_size=50))
def test_entropy_range(labels):
    h = shannon_entropy(labels)
    assert 0.0 <= h <= 1.0
    assert (h == 0.0) == (all(labels) or not any(labels))


def test_mdlp_clean_split():
    bins = mdlp_bins([1, 2, 3, 10, 11, 12], [F, F, F, T, T, T], 2)
    assert bins.cuts == (6.5,)
    assert bins.gain == pytest.approx(1.0)
    # brute force agrees, and the MDL test accepts
    cut, gain = exhaustive_best_cut([1, 2, 3, 10, 11, 12], [F, F, F, T, T, T], 2)
    assert (cut, gain) == (6.5, 1.0)
    assert mdl_passes([1, 2, 3, 10, 11, 12], [F, F, F, T, T, T], 6.5)


def test_mdlp_pure_labels():
    bins = mdlp_bins([1, 5, 2, 8], [F, F, F, F], 1)
    assert bins.cuts == () and bins.gain == 0.0


def test_mdlp_constant_feature():
    bins = mdlp_bins([5.0] * 8, [F, T] * 4, 1)
    assert bins.cuts == () and bins.gain == 0.0


def test_mdlp_length_mismatch():
    with pytest.raises(InputMismatch):
        mdlp_bins([1, 2, 3], [T, F], 1)


def test_mdlp_respects_min_support():
    values = list(range(40))
    labels = [v >= 37 for v in values]
    assert mdlp_bins(values, labels, 1).cuts == (36.5,)
    bins = mdlp_bins(values, labels, 5)
    for iv in bins.intervals:
        assert sum(v in iv for v in values) >= 5


def test_mdlp_recurses():
    values = list(range(60))
    labels = [20 <= v < 40 for v in values]
    assert mdlp_bins(values, labels, 2).cuts == (19.5, 39.5)


def test_bin_of_half_open():
    bins = FeatureBins("loc", (6.5,), 1.0)
    assert bin_of(bins, 6.5) == Interval(6.5, math.inf)
    assert bin_of(bins, 3.0) == Interval(-math.inf, 6.5)
    assert bin_of(FeatureBins("x", (2.0, 8.0), 0.5), 5.0) == Interval(2.0, 8.0)


def test_interval_rejects_empty():
    with pytest.raises(ValueError):
        Interval(3.0, 3.0)


def test_default_min_support():
    assert default_min_support(9) == 4
    assert default_min_support(100) == 10
    assert default_min_support(101) == 11


small_data = st.integers(2, 20).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 12), min_size=n, max_size=n),
        st.lists(st.booleans(), min_size=n, max_size=n),
        st.integers(1, 4),
    )
)


@settings(max_examples=300, deadline=None)
@given(small_data)
def test_first_cut_matches_exhaustive_search(data):
    values, labels, min_support = data
    values = [float(v) for v in values]
    bins = mdlp_bins(values, labels, min_support)
    best = exhaustive_best_cut(values, labels, min_support)
    if all(labels) or not any(labels) or best is None or not mdl_passes(values, labels, best[0]):
        assert bins.cuts == ()
    else:
        assert bins.accepted[0] == best[0]


@settings(max_examples=150, deadline=None)
@given(small_data)
def test_monotone_transform_keeps_partition(data):
    values, labels, min_support = data
    a = mdlp_bins(values, labels, min_support)
    b = mdlp_bins([math.exp(v / 3) * 7 + 1 for v in values], labels, min_support)
    group = lambda bins, vs: [bin_of(bins, v) for v in vs]  # noqa: E731
    ga = group(a, values)
    gb = group(b, [math.exp(v / 3) * 7 + 1 for v in values])
    # Same partition of instances: i ~ j under one iff under the other.
    for i in range(len(values)):
        for j in range(len(values)):
            assert (ga[i] == ga[j]) == (gb[i] == gb[j])


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=60),
    st.integers(0, 2**32 - 1),
    st.integers(1, 6),
)
def test_bins_cover_the_line(values, seed, min_support):
    labels = np.random.default_rng(seed).random(len(values)) < 0.4
    bins = mdlp_bins(values, labels, min_support)
    ivs = bins.intervals
    assert ivs[0].low == -math.inf and ivs[-1].high == math.inf
    assert all(a.high == b.low for a, b in zip(ivs, ivs[1:]))
    assert list(bins.cuts) == sorted(set(bins.cuts))
    for v in values:
        assert sum(v in iv for iv in ivs) == 1
    if bins.cuts:
        for iv in ivs:
            assert sum(v in iv for v in values) >= min_support
    assert len(ivs) == len(bins.cuts) + 1
