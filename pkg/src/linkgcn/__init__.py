"""GCN-based linkage prediction clustering on imbalanced embedding sets."""

from .cluster import (
    EdgeScoreSet,
    average_precision,
    bcubed,
    edge_ap,
    merge_links,
    score_edges,
)
from .data import (
    EmbeddingSet,
    SynthesisSpec,
    SyntheticSpec,
    build_imbalanced_subset,
    generate_synthetic,
    load_embeddings,
    make_embedding_set,
    save_embeddings,
)
from .knn import ExpansionConfig, NeighborList, eknn, knn
from .losses import LossConfig, LossKind, ce_loss, class_balance_loss, focal_loss
from .model import (
    GcnParams,
    backward,
    forward,
    init_params,
    load_checkpoint,
    save_checkpoint,
)
from .sampling import (
    CandidateWeights,
    Strategy,
    StrategyKind,
    baseline_select,
    resample_balanced,
    riws_weights,
    sample_one_hop,
)
from .subgraph import Subgraph, build_subgraph
from .training import TrainConfig, TrainHistory, train

__version__ = "0.1.0"

__all__ = [
    "EdgeScoreSet", "average_precision", "bcubed", "edge_ap", "merge_links", "score_edges",
    "EmbeddingSet", "SynthesisSpec", "SyntheticSpec", "build_imbalanced_subset",
    "generate_synthetic", "load_embeddings", "make_embedding_set", "save_embeddings",
    "ExpansionConfig", "NeighborList", "eknn", "knn",
    "LossConfig", "LossKind", "ce_loss", "class_balance_loss", "focal_loss",
    "GcnParams", "backward", "forward", "init_params", "load_checkpoint", "save_checkpoint",
    "CandidateWeights", "Strategy", "StrategyKind", "baseline_select",
    "resample_balanced", "riws_weights", "sample_one_hop",
    "Subgraph", "build_subgraph",
    "TrainConfig", "TrainHistory", "train",
]
