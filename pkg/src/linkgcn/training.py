"""End-to-end trainer: pivot iteration, fresh per-epoch sampling, SGD with momentum."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cluster import edge_ap, score_edges
from .data import EmbeddingSet
from .knn import eknn, knn
from .losses import LossConfig, evaluate_loss
from .model import GcnGrads, GcnParams, backward, forward, init_params
from .sampling import Strategy, StrategyKind, select_one_hop
from .subgraph import build_subgraph


@dataclass(frozen=True)
class TrainConfig:
    strategy: Strategy
    loss: LossConfig = field(default_factory=LossConfig)
    epochs: int = 10
    learning_rate: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 1e-5
    seed: int = 0
    deterministic: bool = True
    hidden_dims: tuple[int, ...] = (64, 64)
    slope: float = 0.2
    r: int = 10                  # subgraph edge degree
    holdout_fraction: float = 0.1  # pivots reserved for per-epoch edge AP

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if self.weight_decay < 0:
            raise ValueError("weight decay must be >= 0")
        self.strategy.expansion.validate()
        self.loss.validate()


@dataclass
class TrainHistory:
    epoch_loss: list[float] = field(default_factory=list)
    epoch_ap: list[float] = field(default_factory=list)  # nan when holdout has no positives
    single_class_pools: list[int] = field(default_factory=list)
    clamps: list[int] = field(default_factory=list)
    diverged: bool = False

    def to_tsv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write("epoch\tloss\tap\tsingle_class_pools\tclamps\n")
            for e, (loss, ap, sc, cl) in enumerate(
                zip(self.epoch_loss, self.epoch_ap, self.single_class_pools, self.clamps)
            ):
                fh.write(f"{e}\t{loss:.8f}\t{ap:.8f}\t{sc}\t{cl}\n")


def _sgd_step(
    params: GcnParams,
    grads: GcnGrads,
    velocity: list[np.ndarray],
    lr: float,
    momentum: float,
    weight_decay: float,
) -> None:
    for p, g, v in zip(params.arrays(), grads.arrays(), velocity):
        v *= momentum
        v -= lr * (g + weight_decay * p)
        p += v


def train(dataset: EmbeddingSet, cfg: TrainConfig) -> tuple[GcnParams, TrainHistory]:
    """SGD over shuffled pivots, one subgraph per step, resampled every epoch."""
    cfg.validate()
    exp = cfg.strategy.expansion
    if exp.pool_size > dataset.n - 1:
        raise ValueError(
            f"pool size {exp.pool_size} needs at least {exp.pool_size + 1} samples, "
            f"dataset has {dataset.n}"
        )
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(dataset.n)
    n_hold = min(max(int(dataset.n * cfg.holdout_fraction), 1), 200)
    holdout = perm[:n_hold]
    train_pivots = perm[n_hold:]
    params = init_params(dataset.dim, cfg.hidden_dims, seed=cfg.seed, slope=cfg.slope)
    velocity = [np.zeros_like(a) for a in params.arrays()]
    history = TrainHistory()
    snapshot = params.copy()
    for epoch in range(cfg.epochs):
        epoch_rng = np.random.default_rng([cfg.seed, epoch])
        order = epoch_rng.permutation(train_pivots)
        losses = []
        n_single = 0
        n_clamp = 0
        aborted = False
        for pivot in order:
            pivot = int(pivot)
            if cfg.strategy.kind is StrategyKind.BASELINE_TOPK:
                pool = knn(dataset, pivot, exp.k)
            else:
                pool = eknn(dataset, pivot, exp)
            n_clamp += int(pool.clamped)
            one_hop, degenerate = select_one_hop(
                cfg.strategy, pool, dataset.labels, int(dataset.labels[pivot]), epoch_rng
            )
            n_single += int(degenerate)
            sg = build_subgraph(dataset, pivot, one_hop, exp, r=cfg.r)
            n_clamp += int(sg.r_clamped)
            trace = forward(sg, params)
            loss, dlogits, _ = evaluate_loss(cfg.loss, trace.logits, sg.link_labels)
            if not np.isfinite(loss):
                aborted = True
                break
            losses.append(loss)
            grads = backward(trace, params, dlogits)
            _sgd_step(
                params, grads, velocity, cfg.learning_rate, cfg.momentum, cfg.weight_decay
            )
        if aborted:
            history.diverged = True
            params = snapshot  # last epoch-end checkpoint
            break
        snapshot = params.copy()
        history.epoch_loss.append(float(np.mean(losses)) if losses else float("nan"))
        history.single_class_pools.append(n_single)
        history.clamps.append(n_clamp)
        scored = score_edges(dataset, params, exp, r=cfg.r, pivots=holdout)
        if scored.labels is not None and scored.labels.any():
            history.epoch_ap.append(edge_ap(scored))
        else:
            history.epoch_ap.append(float("nan"))
    return params, history
