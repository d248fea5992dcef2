"""Instance-pivot subgraph construction: pivot-relative features + r-NN adjacency."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .data import EmbeddingSet
from .knn import ExpansionConfig, knn


@dataclass(frozen=True)
class Subgraph:
    """Subgraph around a pivot: 1-hop nodes first, then merged 2-hop nodes.

    features rows are pivot-relative (x_v - x_pivot); adjacency has self-loops
    and rows summing to 1, so A @ H is a weighted mean including self.
    """

    pivot: int
    nodes: np.ndarray          # (n,) global indices, 1-hop prefix
    features: np.ndarray       # (n, d)
    adjacency: np.ndarray      # (n, n) row-normalized
    one_hop_mask: np.ndarray   # (n,) bool
    link_labels: np.ndarray | None  # (n_one_hop,) bool, training only
    r_clamped: bool = False

    @property
    def n_one_hop(self) -> int:
        return int(self.one_hop_mask.sum())


def build_subgraph(
    dataset: EmbeddingSet,
    pivot: int,
    one_hop: np.ndarray,
    cfg: ExpansionConfig,
    r: int = 10,
    with_labels: bool = True,
) -> Subgraph:
    """2-hop set = union of each 1-hop node's k2-NN, minus pivot and 1-hop nodes.

    Every subgraph node gets directed edges to its r nearest neighbors among
    subgraph nodes (r clamped to n-1 with a flag). Duplicated 1-hop entries
    (from oversampling) become duplicate rows with their own edges.
    """
    one_hop = np.asarray(one_hop, dtype=np.int64)
    if one_hop.size == 0:
        raise ValueError("one_hop must be nonempty")
    exclude = {pivot} | set(one_hop.tolist())
    two_hop: list[int] = []
    seen: set[int] = set()
    for h in one_hop:
        for nb in knn(dataset, int(h), cfg.k2).indices:
            nb = int(nb)
            if nb not in exclude and nb not in seen:
                seen.add(nb)
                two_hop.append(nb)
    nodes = np.concatenate([one_hop, np.array(two_hop, dtype=np.int64)]) if two_hop else one_hop.copy()
    feats = dataset.features[nodes] - dataset.features[pivot]
    n = nodes.shape[0]
    r_eff = min(r, n - 1)
    adj = kernels.rnn_adjacency(feats, r_eff)
    np.fill_diagonal(adj, adj.diagonal() + 1.0)
    adj /= adj.sum(axis=1)[:, None]
    mask = np.zeros(n, dtype=bool)
    mask[: one_hop.shape[0]] = True
    labels = (dataset.labels[one_hop] == dataset.labels[pivot]) if with_labels else None
    return Subgraph(
        pivot=pivot,
        nodes=nodes,
        features=feats,
        adjacency=adj,
        one_hop_mask=mask,
        link_labels=labels,
        r_clamped=r_eff < r,
    )


def dump_subgraph_json(sg: Subgraph, path: str | Path) -> None:
    """Debug dump (nodes, edges, labels) for external visualization."""
    edges = [
        [int(sg.nodes[i]), int(sg.nodes[j])]
        for i, j in zip(*np.nonzero(sg.adjacency))
        if i != j
    ]
    payload = {
        "pivot": int(sg.pivot),
        "nodes": sg.nodes.tolist(),
        "one_hop": sg.nodes[sg.one_hop_mask].tolist(),
        "edges": edges,
        "link_labels": None if sg.link_labels is None else sg.link_labels.astype(int).tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
