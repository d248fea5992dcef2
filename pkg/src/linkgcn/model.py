"""Mean-aggregation GCN with a two-logit link classifier head.

Layer rule: H_{l+1} = leaky_relu([H_l || A @ H_l] @ W_l + b_l), with A the
row-normalized self-loop adjacency. All math is float64 and hand-backpropped
so gradients can be checked against finite differences.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .subgraph import Subgraph

CHECKPOINT_MAGIC = b"LGCK"
CHECKPOINT_VERSION = 1


class CheckpointError(Exception):
    pass


class ShapeError(Exception):
    pass


@dataclass
class GcnParams:
    layer_weights: list[np.ndarray]  # (2*d_l, d_{l+1})
    layer_biases: list[np.ndarray]   # (d_{l+1},)
    head_weight: np.ndarray          # (d_L, 2) -> (z_pos, z_neg)
    head_bias: np.ndarray            # (2,)
    slope: float = 0.2               # leaky rectifier negative slope

    @property
    def d_in(self) -> int:
        return self.layer_weights[0].shape[0] // 2

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.layer_weights, self.layer_biases):
            out.extend([w, b])
        out.extend([self.head_weight, self.head_bias])
        return out

    def copy(self) -> "GcnParams":
        return GcnParams(
            [w.copy() for w in self.layer_weights],
            [b.copy() for b in self.layer_biases],
            self.head_weight.copy(),
            self.head_bias.copy(),
            self.slope,
        )


@dataclass
class GcnGrads:
    layer_weights: list[np.ndarray]
    layer_biases: list[np.ndarray]
    head_weight: np.ndarray
    head_bias: np.ndarray

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.layer_weights, self.layer_biases):
            out.extend([w, b])
        out.extend([self.head_weight, self.head_bias])
        return out


@dataclass
class ForwardTrace:
    """Activations cached for backward; logits for the 1-hop nodes only."""

    adjacency: np.ndarray
    inputs: list[np.ndarray]      # H_l per layer (inputs[0] = X')
    aggregated: list[np.ndarray]  # A @ H_l per layer
    pre_act: list[np.ndarray]     # Z_l per layer
    final: np.ndarray
    n_one_hop: int
    logits: np.ndarray            # (n_one_hop, 2)
    consumed: bool = field(default=False, compare=False)


def init_params(
    d_in: int, hidden_dims: tuple[int, ...] = (64, 64), seed: int = 0, slope: float = 0.2
) -> GcnParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    if d_in < 1 or any(h < 1 for h in hidden_dims):
        raise ValueError("all dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    prev = d_in
    for h in hidden_dims:
        fan_in = 2 * prev
        a = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-a, a, size=(fan_in, h)))
        biases.append(np.zeros(h))
        prev = h
    a = 1.0 / np.sqrt(prev)
    head_w = rng.uniform(-a, a, size=(prev, 2))
    return GcnParams(weights, biases, head_w, np.zeros(2), slope)


def forward(sg: Subgraph, params: GcnParams) -> ForwardTrace:
    if sg.features.shape[1] != params.d_in:
        raise ShapeError(
            f"layer 0 expects input dim {params.d_in}, subgraph has {sg.features.shape[1]}"
        )
    a = sg.adjacency
    h = sg.features
    inputs, aggregated, pre_act = [], [], []
    for w, b in zip(params.layer_weights, params.layer_biases):
        m = a @ h
        z = np.concatenate([h, m], axis=1) @ w + b
        inputs.append(h)
        aggregated.append(m)
        pre_act.append(z)
        h = np.where(z >= 0, z, params.slope * z)
    n1 = sg.n_one_hop
    logits = h[:n1] @ params.head_weight + params.head_bias
    return ForwardTrace(a, inputs, aggregated, pre_act, h, n1, logits)


def backward(trace: ForwardTrace, params: GcnParams, dlogits: np.ndarray) -> GcnGrads:
    """Exact reverse-mode gradients of a scalar loss given d loss / d logits."""
    if trace.consumed:
        raise RuntimeError("trace already consumed by a previous backward")
    trace.consumed = True
    n1 = trace.n_one_hop
    g_head_w = trace.final[:n1].T @ dlogits
    g_head_b = dlogits.sum(axis=0)
    dh = np.zeros_like(trace.final)
    dh[:n1] = dlogits @ params.head_weight.T
    gw: list[np.ndarray] = [None] * len(params.layer_weights)  # type: ignore[list-item]
    gb: list[np.ndarray] = [None] * len(params.layer_biases)  # type: ignore[list-item]
    for l in range(len(params.layer_weights) - 1, -1, -1):
        z = trace.pre_act[l]
        dz = dh * np.where(z >= 0, 1.0, params.slope)
        cat = np.concatenate([trace.inputs[l], trace.aggregated[l]], axis=1)
        gw[l] = cat.T @ dz
        gb[l] = dz.sum(axis=0)
        dcat = dz @ params.layer_weights[l].T
        d = trace.inputs[l].shape[1]
        dh = dcat[:, :d] + trace.adjacency.T @ dcat[:, d:]
    return GcnGrads(gw, gb, g_head_w, g_head_b)


# ---------------------------------------------------------------------------
# checkpoints


def params_fingerprint(params: GcnParams) -> str:
    h = hashlib.sha256()
    for arr in params.arrays():
        h.update(arr.tobytes())
    return h.hexdigest()[:16]


def save_checkpoint(params: GcnParams, path: str | Path, config_hash: str = "") -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = params.arrays()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        chash = config_hash.encode()
        fh.write(struct.pack("<IH", CHECKPOINT_VERSION, len(chash)))
        fh.write(chash)
        fh.write(struct.pack("<dI", params.slope, len(params.layer_weights)))
        fh.write(struct.pack("<I", len(arrays)))
        for arr in arrays:
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        for arr in arrays:
            fh.write(arr.astype("<f8").tobytes(order="C"))


def load_checkpoint(path: str | Path) -> tuple[GcnParams, str]:
    path = Path(path)
    try:
        raw = path.read_bytes()
        off = 0

        def take(n: int) -> bytes:
            nonlocal off
            if off + n > len(raw):
                raise CheckpointError(f"truncated checkpoint {path}")
            chunk = raw[off : off + n]
            off += n
            return chunk

        if take(4) != CHECKPOINT_MAGIC:
            raise CheckpointError(f"bad magic in {path}")
        version, hlen = struct.unpack("<IH", take(6))
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        config_hash = take(hlen).decode()
        slope, n_layers = struct.unpack("<dI", take(12))
        (n_arrays,) = struct.unpack("<I", take(4))
        if n_arrays != 2 * n_layers + 2:
            raise CheckpointError("inconsistent array count")
        shapes = []
        for _ in range(n_arrays):
            (ndim,) = struct.unpack("<I", take(4))
            shapes.append(struct.unpack(f"<{ndim}Q", take(8 * ndim)))
        arrays = []
        for shape in shapes:
            count = int(np.prod(shape)) if shape else 1
            arrays.append(np.frombuffer(take(8 * count), dtype="<f8").reshape(shape).copy())
        if off != len(raw):
            raise CheckpointError(f"trailing bytes in {path}")
    except struct.error as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from None
    weights = [arrays[2 * i] for i in range(n_layers)]
    biases = [arrays[2 * i + 1] for i in range(n_layers)]
    for i, (w, b) in enumerate(zip(weights, biases)):
        if w.ndim != 2 or b.shape != (w.shape[1],):
            raise CheckpointError(f"inconsistent shapes at layer {i}")
    return GcnParams(weights, biases, arrays[-2], arrays[-1], float(slope)), config_hash


def validate_input_dim(params: GcnParams, d_in: int) -> None:
    if params.d_in != d_in:
        raise ShapeError(
            f"layer 0 weight expects input dim {params.d_in}, dataset has dim {d_in}"
        )
