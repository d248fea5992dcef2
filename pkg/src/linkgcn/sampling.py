"""1-hop neighbor selection strategies: baseline top-k, balanced resampling, RIWS.

RIWS (reverse-imbalance weighted sampling) gives each candidate class half the
total sampling mass, split uniformly inside the class, so minority candidates
are proportionally up-weighted.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .knn import ExpansionConfig, NeighborList


class StrategyKind(enum.Enum):
    BASELINE_TOPK = "baseline"
    BALANCED_RESAMPLE = "resample"
    RIWS = "riws"


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind
    expansion: ExpansionConfig = field(default_factory=ExpansionConfig)
    seed: int | None = None


@dataclass(frozen=True)
class CandidateWeights:
    """Per-candidate selection probabilities over a pivot's eKNN pool."""

    pivot: int
    indices: np.ndarray
    weights: np.ndarray
    n_same: int
    n_diff: int
    degenerate: bool = False  # single-class pool, uniform fallback


def riws_weights(
    candidates: NeighborList, labels: np.ndarray, pivot_label: int
) -> CandidateWeights:
    """Half the mass to same-class candidates, half to different-class.

    A single-class pool gets uniform weights and a degeneracy flag.
    """
    idx = candidates.indices
    if idx.size == 0:
        raise ValueError("empty candidate list")
    same = labels[idx] == pivot_label
    n_same = int(same.sum())
    n_diff = int(idx.size - n_same)
    if n_same == 0 or n_diff == 0:
        weights = np.full(idx.size, 1.0 / idx.size)
        return CandidateWeights(candidates.pivot, idx, weights, n_same, n_diff, degenerate=True)
    weights = np.where(same, 0.5 / n_same, 0.5 / n_diff)
    return CandidateWeights(candidates.pivot, idx, weights, n_same, n_diff)


def sample_one_hop(
    weights: CandidateWeights, k: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw k distinct candidates by sequential weighted sampling without replacement."""
    if k < 1:
        raise ValueError("k must be >= 1")
    m = weights.indices.shape[0]
    if m <= k:
        return weights.indices.copy()
    w = weights.weights.astype(np.float64).copy()
    chosen = np.empty(k, dtype=np.int64)
    for t in range(k):
        p = w / w.sum()
        j = rng.choice(m, p=p)
        chosen[t] = weights.indices[j]
        w[j] = 0.0
    return chosen


def resample_balanced(
    candidates: NeighborList,
    labels: np.ndarray,
    pivot_label: int,
    k: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, bool]:
    """k/2 same-class + k/2 different-class picks; deficits filled by duplication.

    Returns (selected indices, degenerate flag). A single-class pool falls
    back to the top-k prefix with the flag set. Duplicates are intended:
    oversampling a deficient class repeats its members.
    """
    if k % 2 != 0:
        raise ValueError("balanced resampling requires an even k")
    idx = candidates.indices
    if idx.size == 0:
        raise ValueError("empty candidate list")
    same = labels[idx] == pivot_label
    pos = idx[same]
    neg = idx[~same]
    if pos.size == 0 or neg.size == 0:
        return idx[:k].copy(), True
    half = k // 2
    parts = []
    for group in (pos, neg):
        if group.size >= half:
            parts.append(rng.choice(group, size=half, replace=False))
        else:
            extra = rng.choice(group, size=half - group.size, replace=True)
            parts.append(np.concatenate([group, extra]))
    return np.concatenate(parts).astype(np.int64), False


def baseline_select(candidates: NeighborList, k: int) -> np.ndarray:
    """First k entries of the distance-ordered candidate list."""
    return candidates.indices[:k].copy()


def select_one_hop(
    strategy: Strategy,
    candidates: NeighborList,
    labels: np.ndarray,
    pivot_label: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, bool]:
    """Apply a strategy to a candidate pool; returns (indices, degenerate flag)."""
    k = strategy.expansion.k
    if strategy.kind is StrategyKind.BASELINE_TOPK:
        return baseline_select(candidates, k), False
    if strategy.kind is StrategyKind.BALANCED_RESAMPLE:
        return resample_balanced(candidates, labels, pivot_label, k, rng)
    cw = riws_weights(candidates, labels, pivot_label)
    return sample_one_hop(cw, k, rng), cw.degenerate
