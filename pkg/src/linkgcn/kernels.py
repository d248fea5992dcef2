"""Hot numeric kernels: brute-force distances and r-NN adjacency.

Numba-compiled versions are used when available; set LINKGCN_PURE_NUMPY=1
to force the pure-numpy implementations. Both paths use the same distance
formula and the same deterministic tie-break (ascending row index).
"""

import os

import numpy as np


def _numba_wanted() -> bool:
    if os.environ.get("LINKGCN_PURE_NUMPY", "").lower() in ("1", "true", "yes"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _numba_wanted()


def sq_dists_numpy(features: np.ndarray, pivot: int) -> np.ndarray:
    """Squared Euclidean distance from row `pivot` to every row."""
    diff = features - features[pivot]
    return np.einsum("ij,ij->i", diff, diff)


def rnn_adjacency_numpy(feats: np.ndarray, r: int) -> np.ndarray:
    """Directed r-nearest-neighbor adjacency over the rows of `feats`.

    a[i, j] = 1 iff j is among the r nearest rows to i (self excluded);
    distance ties broken by ascending row index.
    """
    n = feats.shape[0]
    adj = np.zeros((n, n), dtype=np.float64)
    if r <= 0 or n <= 1:
        return adj
    diff = feats[:, None, :] - feats[None, :, :]
    d = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")
    rows = np.repeat(np.arange(n), r)
    adj[rows, order[:, :r].ravel()] = 1.0
    return adj


if NUMBA_ENABLED:
    from numba import njit, prange

    @njit(cache=True, parallel=True)
    def _sq_dists_nb(features, pivot):
        n, d = features.shape
        out = np.empty(n, dtype=np.float64)
        for i in prange(n):
            acc = 0.0
            for j in range(d):
                diff = features[i, j] - features[pivot, j]
                acc += diff * diff
            out[i] = acc
        return out

    @njit(cache=True)
    def _rnn_adjacency_nb(feats, r):
        n, d = feats.shape
        adj = np.zeros((n, n), dtype=np.float64)
        if r <= 0 or n <= 1:
            return adj
        dist = np.empty(n, dtype=np.float64)
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for t in range(d):
                    diff = feats[i, t] - feats[j, t]
                    acc += diff * diff
                dist[j] = acc
            dist[i] = np.inf
            # repeated min scan; strict < keeps the lowest index on ties
            for _ in range(r):
                best = -1
                best_d = np.inf
                for j in range(n):
                    if dist[j] < best_d:
                        best_d = dist[j]
                        best = j
                adj[i, best] = 1.0
                dist[best] = np.inf
        return adj

    def sq_dists(features: np.ndarray, pivot: int) -> np.ndarray:
        return _sq_dists_nb(np.ascontiguousarray(features), pivot)

    def rnn_adjacency(feats: np.ndarray, r: int) -> np.ndarray:
        return _rnn_adjacency_nb(np.ascontiguousarray(feats), r)

else:
    sq_dists = sq_dists_numpy
    rnn_adjacency = rnn_adjacency_numpy
