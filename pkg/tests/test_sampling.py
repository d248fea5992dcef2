import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkgcn import (
    ExpansionConfig,
    Strategy,
    StrategyKind,
    baseline_select,
    resample_balanced,
    riws_weights,
    sample_one_hop,
)
from linkgcn.knn import NeighborList
from linkgcn.sampling import select_one_hop


def make_pool(indices):
    indices = np.asarray(indices, dtype=np.int64)
    return NeighborList(
        pivot=0,
        indices=indices,
        distances=np.arange(indices.size, dtype=np.float64),
        k_requested=indices.size,
    )


def test_riws_weights_split_mass_evenly_between_classes():
    labels = np.array([1, 1, 1, 2, 2, 1, 3])
    pool = make_pool([0, 1, 2, 3, 4, 5, 6])
    cw = riws_weights(pool, labels, pivot_label=1)
    same = labels[pool.indices] == 1
    assert cw.weights[same].sum() == pytest.approx(0.5, abs=1e-15)
    assert cw.weights[~same].sum() == pytest.approx(0.5, abs=1e-15)
    assert cw.n_same == 4 and cw.n_diff == 3 and not cw.degenerate
    # uniform inside each class
    assert np.unique(cw.weights[same]).size == 1
    assert np.unique(cw.weights[~same]).size == 1


def test_riws_weights_single_class_pool_falls_back_to_uniform():
    labels = np.zeros(6, dtype=np.int64)
    cw = riws_weights(make_pool(np.arange(6)), labels, pivot_label=0)
    assert cw.degenerate
    np.testing.assert_allclose(cw.weights, 1.0 / 6, atol=1e-15)


def test_riws_weights_rejects_empty_pool():
    with pytest.raises(ValueError):
        riws_weights(make_pool([]), np.zeros(1), 0)


@given(
    n_same=st.integers(1, 12),
    n_diff=st.integers(1, 12),
    seed=st.integers(0, 10_000),
)
@settings(max_examples=200, deadline=None)
def test_riws_class_mass_invariant_property(n_same, n_diff, seed):
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.array([0] * n_same + [1] * n_diff))
    pool = make_pool(np.arange(labels.size))
    cw = riws_weights(pool, labels, pivot_label=0)
    same = labels == 0
    assert abs(cw.weights[same].sum() - 0.5) < 1e-12
    assert abs(cw.weights[~same].sum() - 0.5) < 1e-12
    assert abs(cw.weights.sum() - 1.0) < 1e-12


def test_sample_one_hop_returns_distinct_members_of_pool():
    labels = np.array([0] * 10 + [1] * 10)
    cw = riws_weights(make_pool(np.arange(20)), labels, 0)
    rng = np.random.default_rng(0)
    sel = sample_one_hop(cw, 10, rng)
    assert sel.shape == (10,)
    assert np.unique(sel).size == 10
    assert set(sel.tolist()) <= set(range(20))


def test_sample_one_hop_short_pool_returns_everything():
    labels = np.zeros(10, dtype=np.int64)
    labels[2] = 1
    cw = riws_weights(make_pool([5, 9, 2]), labels, 0)
    sel = sample_one_hop(cw, 10, np.random.default_rng(0))
    assert sel.tolist() == [5, 9, 2]


def test_sample_one_hop_upweights_minority_class():
    # 18 same-class vs 2 different-class candidates: under RIWS both
    # minority members are picked almost always (each carries weight 0.25)
    labels = np.array([0] * 18 + [1] * 2)
    cw = riws_weights(make_pool(np.arange(20)), labels, 0)
    rng = np.random.default_rng(1)
    hits = 0
    trials = 400
    for _ in range(trials):
        sel = sample_one_hop(cw, 10, rng)
        hits += int((labels[sel] == 1).sum())
    assert hits / trials > 1.8  # near-certain inclusion of both minority nodes


def test_sample_one_hop_single_draw_marginals_match_weights():
    # pool {a: 0.5, b: 0.25, c: 0.25}: one same-class candidate carries 0.5,
    # two different-class candidates carry 0.25 each
    labels = np.array([0, 1, 1])
    cw = riws_weights(make_pool([0, 1, 2]), labels, 0)
    np.testing.assert_allclose(cw.weights, [0.5, 0.25, 0.25], atol=1e-15)
    rng = np.random.default_rng(2)
    draws = 100_000
    hits_a = 0
    for _ in range(draws):
        hits_a += int(sample_one_hop(cw, 1, rng)[0] == 0)
    assert 0.49 <= hits_a / draws <= 0.51


def test_sample_one_hop_is_deterministic_given_rng_state():
    labels = np.array([0] * 10 + [1] * 10)
    cw = riws_weights(make_pool(np.arange(20)), labels, 0)
    a = sample_one_hop(cw, 10, np.random.default_rng(99))
    b = sample_one_hop(cw, 10, np.random.default_rng(99))
    np.testing.assert_array_equal(a, b)


def test_resample_balanced_even_split_without_duplicates():
    labels = np.array([0] * 8 + [1] * 8)
    sel, degenerate = resample_balanced(
        make_pool(np.arange(16)), labels, 0, k=10, rng=np.random.default_rng(0)
    )
    assert not degenerate
    assert sel.shape == (10,)
    assert (labels[sel[:5]] == 0).all() and (labels[sel[5:]] == 1).all()
    assert np.unique(sel).size == 10


def test_resample_balanced_oversamples_deficient_class_by_duplication():
    labels = np.array([0] * 14 + [1] * 2)
    sel, degenerate = resample_balanced(
        make_pool(np.arange(16)), labels, 0, k=10, rng=np.random.default_rng(0)
    )
    assert not degenerate
    neg = sel[labels[sel] == 1]
    assert neg.shape == (5,)
    assert set(neg.tolist()) == {14, 15}  # duplicates of the two minority nodes


def test_resample_balanced_single_class_pool_falls_back_to_topk():
    labels = np.zeros(16, dtype=np.int64)
    sel, degenerate = resample_balanced(
        make_pool(np.arange(16)), labels, 0, k=10, rng=np.random.default_rng(0)
    )
    assert degenerate
    np.testing.assert_array_equal(sel, np.arange(10))


def test_resample_balanced_rejects_odd_k():
    with pytest.raises(ValueError, match="even k"):
        resample_balanced(make_pool(np.arange(4)), np.zeros(4), 0, k=3, rng=np.random.default_rng(0))


def test_baseline_select_takes_distance_prefix():
    np.testing.assert_array_equal(baseline_select(make_pool([4, 8, 1, 9]), 2), [4, 8])


@pytest.mark.parametrize(
    "kind", [StrategyKind.BASELINE_TOPK, StrategyKind.BALANCED_RESAMPLE, StrategyKind.RIWS]
)
def test_select_one_hop_dispatch(kind):
    labels = np.array([0] * 10 + [1] * 10)
    strategy = Strategy(kind=kind, expansion=ExpansionConfig(k=10, gamma_expand=2.0))
    sel, degenerate = select_one_hop(
        strategy, make_pool(np.arange(20)), labels, 0, np.random.default_rng(0)
    )
    assert sel.shape == (10,)
    assert not degenerate
    if kind is StrategyKind.BASELINE_TOPK:
        np.testing.assert_array_equal(sel, np.arange(10))
