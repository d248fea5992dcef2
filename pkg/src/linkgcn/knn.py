"""Exact brute-force nearest neighbors and expanded-KNN candidate pools."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import EmbeddingSet


@dataclass(frozen=True)
class NeighborList:
    """Pivot's nearest neighbors, closest first; the pivot itself excluded."""

    pivot: int
    indices: np.ndarray    # (k,) int64
    distances: np.ndarray  # (k,) float64, non-decreasing
    k_requested: int
    clamped: bool = False

    def __len__(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class ExpansionConfig:
    """1-hop count k, eKNN expansion coefficient, and 2-hop per-node count."""

    k: int = 10
    gamma_expand: float = 1.0
    k2: int = 5

    def validate(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.gamma_expand < 1.0:
            raise ValueError("gamma_expand must be >= 1")
        if self.k2 < 1:
            raise ValueError("k2 must be >= 1")

    @property
    def pool_size(self) -> int:
        # epsilon guards against 0.1*k style float fuzz pushing ceil up a notch
        return math.ceil(self.k * self.gamma_expand - 1e-9)


def knn(dataset: EmbeddingSet, pivot: int, k: int) -> NeighborList:
    """Exact k nearest rows to `pivot` by Euclidean distance.

    Distance ties break by ascending node index; result is clamped to N-1.
    """
    n = dataset.n
    if not 0 <= pivot < n:
        raise IndexError(f"pivot {pivot} out of range for N={n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    sq = kernels.sq_dists(dataset.features, pivot)
    order = np.argsort(sq, kind="stable")
    order = order[order != pivot]
    take = min(k, n - 1)
    idx = order[:take]
    return NeighborList(
        pivot=pivot,
        indices=idx.astype(np.int64),
        distances=np.sqrt(sq[idx]),
        k_requested=k,
        clamped=take < k,
    )


def eknn(dataset: EmbeddingSet, pivot: int, cfg: ExpansionConfig) -> NeighborList:
    """The pivot's ceil(k * gamma) nearest neighbors (the 1-hop candidate pool)."""
    cfg.validate()
    return knn(dataset, pivot, cfg.pool_size)
