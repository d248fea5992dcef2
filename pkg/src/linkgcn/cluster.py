"""Test-time edge scoring, AP, threshold merging via union-find, and BCubed."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import EmbeddingSet
from .knn import ExpansionConfig, knn
from .model import GcnParams, forward, validate_input_dim
from .subgraph import build_subgraph


@dataclass
class EdgeScoreSet:
    """Pooled pivot-neighbor link scores; labels present when ground truth is."""

    pivots: np.ndarray     # (M,) int64
    neighbors: np.ndarray  # (M,) int64
    scores: np.ndarray     # (M,) float64 in [0, 1]
    labels: np.ndarray | None = None  # (M,) bool

    def __len__(self) -> int:
        return self.scores.shape[0]

    def to_tsv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write("pivot\tneighbor\tscore\tlabel\n")
            for i in range(len(self)):
                lab = "" if self.labels is None else int(self.labels[i])
                fh.write(f"{self.pivots[i]}\t{self.neighbors[i]}\t{self.scores[i]:.10f}\t{lab}\n")


def _softmax_pos(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e[:, 0] / e.sum(axis=1)


def score_edges(
    dataset: EmbeddingSet,
    params: GcnParams,
    cfg: ExpansionConfig,
    r: int = 10,
    with_labels: bool = True,
    pivots: np.ndarray | None = None,
) -> EdgeScoreSet:
    """Score every pivot's top-k links with deterministic baseline subgraphs."""
    validate_input_dim(params, dataset.dim)
    if pivots is None:
        pivots = np.arange(dataset.n)
    all_p, all_n, all_s, all_l = [], [], [], []
    for pivot in pivots:
        pivot = int(pivot)
        nl = knn(dataset, pivot, cfg.k)
        sg = build_subgraph(dataset, pivot, nl.indices, cfg, r=r, with_labels=with_labels)
        trace = forward(sg, params)
        probs = _softmax_pos(trace.logits)
        all_p.append(np.full(len(nl), pivot, dtype=np.int64))
        all_n.append(nl.indices)
        all_s.append(probs)
        if with_labels:
            all_l.append(sg.link_labels)
    return EdgeScoreSet(
        pivots=np.concatenate(all_p),
        neighbors=np.concatenate(all_n),
        scores=np.concatenate(all_s),
        labels=np.concatenate(all_l) if with_labels else None,
    )


def average_precision(scores: np.ndarray, labels: np.ndarray) -> float:
    """AP = mean over positives of precision at each positive's rank.

    Sorted by descending score; ties keep stable input order.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if labels.sum() == 0:
        raise ValueError("average precision needs at least one positive label")
    order = np.argsort(-scores, kind="stable")
    hits = labels[order]
    ranks = np.arange(1, hits.shape[0] + 1)
    precision_at = np.cumsum(hits) / ranks
    # fsum gives the correctly-rounded total, making the result independent
    # of summation order
    return math.fsum(precision_at[hits]) / int(hits.sum())


def edge_ap(score_set: EdgeScoreSet) -> float:
    if score_set.labels is None:
        raise ValueError("score set carries no ground-truth labels")
    return average_precision(score_set.scores, score_set.labels)


class UnionFind:
    """Union by size with path compression."""

    def __init__(self, n: int):
        self.parent = np.arange(n)
        self.size = np.ones(n, dtype=np.int64)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def merge_links(score_set: EdgeScoreSet, tau: float, n: int) -> np.ndarray:
    """Connected components over edges with score >= tau; dense cluster ids."""
    uf = UnionFind(n)
    keep = score_set.scores >= tau
    for p, q in zip(score_set.pivots[keep], score_set.neighbors[keep]):
        uf.union(int(p), int(q))
    roots = np.array([uf.find(i) for i in range(n)])
    _, dense = np.unique(roots, return_inverse=True)
    return dense.astype(np.int64)


def bcubed(pred: np.ndarray, truth: np.ndarray) -> tuple[float, float, float]:
    """Per-item BCubed precision/recall averaged over items; F = harmonic mean."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"size mismatch: {pred.shape} vs {truth.shape}")
    _, c = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    n_c = c.max() + 1
    n_t = t.max() + 1
    contingency = np.zeros((n_c, n_t), dtype=np.int64)
    np.add.at(contingency, (c, t), 1)
    cluster_sizes = contingency.sum(axis=1)
    class_sizes = contingency.sum(axis=0)
    overlap = contingency[c, t].astype(np.float64)
    precision = float((overlap / cluster_sizes[c]).mean())
    recall = float((overlap / class_sizes[t]).mean())
    f = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f


def clustering_to_tsv(clusters: np.ndarray, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write("node\tcluster\n")
        for i, cid in enumerate(clusters):
            fh.write(f"{i}\t{int(cid)}\n")
