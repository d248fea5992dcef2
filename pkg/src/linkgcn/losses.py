"""Link-classification losses over (z_pos, z_neg) logits, with exact gradients.

Labels are 1 for a true link (same identity as the pivot), 0 otherwise.
Column 0 of the logits is the positive-class logit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

_P_CLAMP = 1e-12


class LossKind(enum.Enum):
    CE = "ce"
    CLASS_BALANCE = "cb"
    FOCAL = "focal"


@dataclass(frozen=True)
class LossConfig:
    kind: LossKind = LossKind.CE
    alpha_pos: float = 0.5   # focal positive-class weight; alpha_neg = 1 - alpha_pos
    gamma_focal: float = 2.0

    def validate(self) -> None:
        if not 0.0 < self.alpha_pos < 1.0:
            raise ValueError("alpha_pos must be in (0, 1)")
        if self.gamma_focal < 0.0:
            raise ValueError("gamma_focal must be >= 0")


def _softmax2(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _prepare(logits: np.ndarray, labels: np.ndarray):
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if logits.ndim != 2 or logits.shape[1] != 2:
        raise ValueError(f"expected (B, 2) logits, got {logits.shape}")
    if logits.shape[0] == 0:
        raise ValueError("empty batch")
    y = labels.astype(bool)
    probs = _softmax2(logits)
    # one-hot of the true class in (pos, neg) column order
    onehot = np.stack([y, ~y], axis=1).astype(np.float64)
    p_true = np.where(y, probs[:, 0], probs[:, 1])
    return logits, y, probs, onehot, p_true


def ce_loss(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean two-class softmax cross-entropy; gradient w.r.t. logits."""
    _, _, probs, onehot, p_true = _prepare(logits, labels)
    b = probs.shape[0]
    loss = float(-np.log(np.clip(p_true, _P_CLAMP, None)).mean())
    grad = (probs - onehot) / b
    return loss, grad


def class_balance_loss(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, bool]:
    """Average of per-class mean cross-entropies: (mean_pos + mean_neg) / 2.

    Invariant under duplicating all members of one class. If only one class
    is present, falls back to that class's mean CE with a degeneracy flag.
    """
    _, y, probs, onehot, p_true = _prepare(logits, labels)
    per_sample = -np.log(np.clip(p_true, _P_CLAMP, None))
    per_sample_grad = probs - onehot
    n_pos = int(y.sum())
    n_neg = int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        n = max(n_pos, n_neg)
        return float(per_sample.mean()), per_sample_grad / n, True
    scale = np.where(y, 0.5 / n_pos, 0.5 / n_neg)
    loss = float((per_sample * scale).sum())
    return loss, per_sample_grad * scale[:, None], False


def focal_loss(
    logits: np.ndarray, labels: np.ndarray, cfg: LossConfig
) -> tuple[float, np.ndarray]:
    """Mean of -alpha_c * (1 - p_c)^gamma * log(p_c) over the batch."""
    cfg.validate()
    _, y, probs, onehot, p_true = _prepare(logits, labels)
    b = probs.shape[0]
    g = cfg.gamma_focal
    alpha = np.where(y, cfg.alpha_pos, 1.0 - cfg.alpha_pos)
    p = np.clip(p_true, _P_CLAMP, 1.0 - _P_CLAMP)
    focal_pow = (1.0 - p) ** g
    loss = float((alpha * focal_pow * -np.log(p)).mean() )
    # d term / d p_true; the gamma term vanishes identically at gamma = 0
    dpow = np.zeros_like(p) if g == 0.0 else g * (1.0 - p) ** (g - 1.0) * np.log(p)
    dt_dp = alpha * (dpow - focal_pow / p)
    # clamp is flat: no gradient where p_true left the clamp window
    active = (p_true >= _P_CLAMP) & (p_true <= 1.0 - _P_CLAMP)
    dt_dp = np.where(active, dt_dp, 0.0)
    # d p_true / d z_j = p_true * (onehot_j - probs_j)
    grad = (dt_dp * p_true)[:, None] * (onehot - probs) / b
    return loss, grad


def evaluate_loss(
    cfg: LossConfig, logits: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, bool]:
    """Dispatch on cfg.kind; returns (loss, grad w.r.t. logits, degenerate flag)."""
    if cfg.kind is LossKind.CE:
        loss, grad = ce_loss(logits, labels)
        return loss, grad, False
    if cfg.kind is LossKind.CLASS_BALANCE:
        return class_balance_loss(logits, labels)
    loss, grad = focal_loss(logits, labels, cfg)
    return loss, grad, False
