import numpy as np
import pytest

from linkgcn import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def test_sq_dists_matches_direct_formula(rng):
    x = rng.normal(size=(40, 7))
    got = kernels.sq_dists(x, 3)
    want = ((x - x[3]) ** 2).sum(axis=1)
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)
    assert got[3] == pytest.approx(0.0, abs=1e-15)


def test_sq_dists_paths_agree(rng):
    x = rng.normal(size=(25, 5))
    np.testing.assert_allclose(
        kernels.sq_dists(x, 0), kernels.sq_dists_numpy(x, 0), rtol=0, atol=1e-12
    )


def test_rnn_adjacency_basic_shape_and_degree(rng):
    x = rng.normal(size=(12, 4))
    adj = kernels.rnn_adjacency(x, 3)
    assert adj.shape == (12, 12)
    assert (adj.sum(axis=1) == 3).all()
    assert np.diag(adj).sum() == 0  # self excluded


def test_rnn_adjacency_paths_agree(rng):
    for _ in range(10):
        n = int(rng.integers(2, 30))
        x = rng.normal(size=(n, 3))
        r = int(rng.integers(1, n))
        np.testing.assert_array_equal(
            kernels.rnn_adjacency(x, r), kernels.rnn_adjacency_numpy(x, r)
        )


def test_rnn_adjacency_tie_break_prefers_low_index():
    # rows 1 and 2 are equidistant from row 0; with r=1 the edge goes to 1
    x = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [5.0, 5.0]])
    adj = kernels.rnn_adjacency(x, 1)
    assert adj[0, 1] == 1.0 and adj[0, 2] == 0.0


def test_rnn_adjacency_degenerate_inputs():
    x = np.zeros((1, 3))
    assert kernels.rnn_adjacency(x, 2).sum() == 0
    x = np.zeros((4, 3))
    assert kernels.rnn_adjacency(x, 0).sum() == 0


def test_rnn_adjacency_all_equal_rows_uses_index_order():
    x = np.zeros((5, 2))
    adj = kernels.rnn_adjacency(x, 2)
    # every row links to the two lowest non-self indices
    want = np.zeros((5, 5))
    for i in range(5):
        picks = [j for j in range(5) if j != i][:2]
        want[i, picks] = 1.0
    np.testing.assert_array_equal(adj, want)
