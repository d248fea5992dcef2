"""Labeled embedding sets: on-disk formats, synthetic generation, imbalanced subsetting.

File formats:
  features: magic "LBEM", u32 LE version=1, u64 LE N, u64 LE d, then N*d f32 LE row-major
  labels:   UTF-8 text, one integer per line, N lines
  manifest: JSON {"features": ..., "labels": ..., "name": ...} with paths relative
            to the manifest's directory
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"LBEM"
FORMAT_VERSION = 1


class DataError(Exception):
    """Raised on malformed embedding files or invalid data specs."""


@dataclass(frozen=True)
class EmbeddingSet:
    """N x d unit-norm feature matrix with dense integer identity labels."""

    features: np.ndarray  # (N, d) float64
    labels: np.ndarray    # (N,) int64, dense 0..C-1
    name: str = ""
    # dense label -> original label id, recorded when labels were remapped
    label_map: np.ndarray | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def _densify(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uniq, dense = np.unique(labels, return_inverse=True)
    return dense.astype(np.int64), uniq.astype(np.int64)


def make_embedding_set(
    features: np.ndarray, labels: np.ndarray, name: str = "", normalize: bool = True
) -> EmbeddingSet:
    """Validate, optionally L2-normalize rows, densify labels."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if features.ndim != 2 or features.shape[0] < 2 or features.shape[1] < 1:
        raise DataError(f"need an N x d matrix with N >= 2, d >= 1, got shape {features.shape}")
    if labels.shape != (features.shape[0],):
        raise DataError(
            f"label count {labels.shape} does not match feature rows {features.shape[0]}"
        )
    bad = ~np.isfinite(features)
    if bad.any():
        row = int(np.argwhere(bad)[0, 0])
        raise DataError(f"non-finite feature value at row {row}")
    if normalize:
        norms = np.linalg.norm(features, axis=1)
        zero = norms < 1e-30
        if zero.any():
            raise DataError(f"zero-norm feature row {int(np.argmax(zero))} cannot be normalized")
        # idempotent: rows already unit-length at storage precision are left
        # untouched, so a save/load round trip is bit-exact
        needs = np.abs(norms - 1.0) > 1e-6
        if needs.any():
            features = np.where(needs[:, None], features / norms[:, None], features)
    dense, label_map = _densify(labels)
    return EmbeddingSet(features=features, labels=dense, name=name, label_map=label_map)


# ---------------------------------------------------------------------------
# on-disk formats


def _write_features(features: np.ndarray, path: Path) -> None:
    n, d = features.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQQ", FORMAT_VERSION, n, d))
        fh.write(features.astype("<f4").tobytes(order="C"))


def _read_features(path: Path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise DataError(f"bad magic {magic!r} in {path}, expected {MAGIC!r}")
        header = fh.read(20)
        if len(header) != 20:
            raise DataError(f"truncated header in {path}")
        version, n, d = struct.unpack("<IQQ", header)
        if version != FORMAT_VERSION:
            raise DataError(f"unsupported version {version} in {path}")
        payload = fh.read()
    expected = n * d * 4
    if len(payload) != expected:
        raise DataError(f"payload size {len(payload)} != expected {expected} in {path}")
    return np.frombuffer(payload, dtype="<f4").reshape(n, d).astype(np.float64)


def save_embeddings(dataset: EmbeddingSet, manifest_path: str | Path) -> Path:
    """Write features + labels + manifest; returns the manifest path."""
    manifest_path = Path(manifest_path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    stem = manifest_path.stem
    feat_name = f"{stem}.lbem"
    label_name = f"{stem}.labels.txt"
    _write_features(dataset.features, manifest_path.parent / feat_name)
    with open(manifest_path.parent / label_name, "w") as fh:
        fh.writelines(f"{int(y)}\n" for y in dataset.labels)
    with open(manifest_path, "w") as fh:
        json.dump({"features": feat_name, "labels": label_name, "name": dataset.name}, fh, indent=2)
        fh.write("\n")
    return manifest_path


def load_embeddings(manifest_path: str | Path) -> EmbeddingSet:
    """Load a manifest; rows are L2-normalized and labels densified."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise DataError(f"manifest not found: {manifest_path}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    base = manifest_path.parent
    features = _read_features(base / manifest["features"])
    label_path = base / manifest["labels"]
    try:
        labels = np.array([int(line) for line in label_path.read_text().split()], dtype=np.int64)
    except ValueError as exc:
        raise DataError(f"malformed label file {label_path}: {exc}") from None
    if labels.shape[0] != features.shape[0]:
        raise DataError(
            f"label file has {labels.shape[0]} rows but features have {features.shape[0]}"
        )
    return make_embedding_set(features, labels, name=manifest.get("name", manifest_path.stem))


# ---------------------------------------------------------------------------
# synthetic generation


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian blob generator config: C classes around separated centers.

    Two layouts share one generator. With ``parents=None`` every class gets an
    independently placed center. With ``parents`` given, classes whose entry is
    -1 are anchors placed by rejection sampling (pairwise distance in
    [separation, max_separation]); every other class orbits its parent anchor
    at a distance drawn uniformly from ``orbit``, in a uniformly random
    direction. Orbiting tail classes around anchor classes is what makes small
    identities border large ones instead of floating in empty space.
    """

    class_count: int
    sizes: tuple[int, ...]
    dim: int
    sigma: float | tuple[float, ...] = 0.1  # scalar or one spread per class
    separation: float = 1.0
    seed: int = 0
    parents: tuple[int, ...] | None = None      # -1 = anchor, else anchor class id
    orbit: tuple[float, float] | None = None    # satellite center distance range
    max_separation: float | None = None         # cap on anchor pairwise distance

    def sigmas(self) -> tuple[float, ...]:
        if np.isscalar(self.sigma):
            return (float(self.sigma),) * self.class_count
        return tuple(float(s) for s in self.sigma)

    def validate(self) -> None:
        if self.class_count < 1 or len(self.sizes) != self.class_count:
            raise DataError("sizes must list one entry per class")
        if any(s < 1 for s in self.sizes):
            raise DataError("all class sizes must be >= 1")
        sigmas = self.sigmas()
        if len(sigmas) != self.class_count:
            raise DataError("sigma must be a scalar or list one spread per class")
        if any(not (np.isfinite(s) and s > 0) for s in sigmas):
            raise DataError("sigma must be finite and positive")
        if not (np.isfinite(self.separation) and self.separation > 0):
            raise DataError("separation must be finite and positive")
        if self.max_separation is not None and self.max_separation < self.separation:
            raise DataError("max_separation must be >= separation")
        if self.dim < 1:
            raise DataError("dim must be >= 1")
        if self.parents is not None:
            if len(self.parents) != self.class_count:
                raise DataError("parents must list one entry per class")
            anchors = {c for c, p in enumerate(self.parents) if p == -1}
            if not anchors:
                raise DataError("at least one class must be an anchor (parent -1)")
            for c, p in enumerate(self.parents):
                if p != -1 and p not in anchors:
                    raise DataError(f"class {c} orbits class {p}, which is not an anchor")
            if self.orbit is None:
                raise DataError("orbit range is required when parents are given")
            lo, hi = self.orbit
            if not (0 < lo <= hi and np.isfinite(hi)):
                raise DataError("orbit must be a finite range with 0 < lo <= hi")


def _place_centers(
    rng: np.random.Generator,
    count: int,
    dim: int,
    sep: float,
    max_sep: float | None = None,
) -> np.ndarray:
    centers: list[np.ndarray] = []
    # tight scale keeps typical center distances a small multiple of the
    # minimum, so neighboring classes genuinely border each other
    scale = sep / 4.0
    attempts = 0
    while len(centers) < count:
        cand = rng.normal(0.0, scale, size=dim)
        dists = [np.linalg.norm(cand - c) for c in centers]
        if all(d >= sep for d in dists) and (max_sep is None or all(d <= max_sep for d in dists)):
            centers.append(cand)
            attempts = 0
        else:
            attempts += 1
            if attempts > 200:
                if max_sep is None:
                    scale *= 1.5
                else:
                    # a capped layout can wedge itself; restart the whole draw
                    centers = []
                attempts = 0
    return np.stack(centers)


def _layout_centers(rng: np.random.Generator, spec: SyntheticSpec) -> np.ndarray:
    if spec.parents is None:
        return _place_centers(rng, spec.class_count, spec.dim, spec.separation, spec.max_separation)
    anchor_ids = [c for c, p in enumerate(spec.parents) if p == -1]
    anchors = _place_centers(rng, len(anchor_ids), spec.dim, spec.separation, spec.max_separation)
    placed = {c: anchors[i] for i, c in enumerate(anchor_ids)}
    lo, hi = spec.orbit
    centers = np.empty((spec.class_count, spec.dim))
    for c, p in enumerate(spec.parents):
        if p == -1:
            centers[c] = placed[c]
        else:
            direction = rng.normal(0.0, 1.0, size=spec.dim)
            direction /= np.linalg.norm(direction)
            centers[c] = placed[p] + direction * rng.uniform(lo, hi)
    return centers


def generate_synthetic(spec: SyntheticSpec) -> EmbeddingSet:
    """Deterministic Gaussian-blob embedding set; rows unit-normalized.

    Values are rounded through f32 so a save/load round trip is bit exact.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    centers = _layout_centers(rng, spec)
    rows = []
    labels = []
    sigmas = spec.sigmas()
    for c, size in enumerate(spec.sizes):
        rows.append(centers[c] + rng.normal(0.0, sigmas[c], size=(size, spec.dim)))
        labels.extend([c] * size)
    features = np.concatenate(rows)
    features /= np.linalg.norm(features, axis=1)[:, None]
    features = features.astype(np.float32).astype(np.float64)
    return make_embedding_set(
        features, np.array(labels), name=f"synth-C{spec.class_count}-d{spec.dim}-s{spec.seed}",
        normalize=False,
    )


# ---------------------------------------------------------------------------
# (m, n) imbalanced subsetting


@dataclass(frozen=True)
class SynthesisSpec:
    """Keep the top-m identities whole, truncate every other to n samples."""

    majority_identity_count: int
    minority_identity_size: int
    seed: int = 0

    def validate(self) -> None:
        if self.majority_identity_count < 0:
            raise DataError("majority_identity_count must be >= 0")
        if self.minority_identity_size < 1:
            raise DataError("minority_identity_size must be >= 1")


def build_imbalanced_subset(dataset: EmbeddingSet, spec: SynthesisSpec) -> EmbeddingSet:
    """Head classes keep all rows; tail classes keep min(size, n) uniform rows.

    Head selection orders identities by descending sample count, ties by
    ascending label id. Rows stay in original order; labels are re-densified
    with head classes first.
    """
    spec.validate()
    m = spec.majority_identity_count
    sizes = dataset.class_sizes()
    c = sizes.shape[0]
    if m > c:
        raise DataError(f"majority_identity_count {m} exceeds class count {c}")
    order = np.lexsort((np.arange(c), -sizes))
    head = set(order[:m].tolist())
    rng = np.random.default_rng(spec.seed)
    keep = np.zeros(dataset.n, dtype=bool)
    for cls in range(c):
        idx = np.flatnonzero(dataset.labels == cls)
        if cls in head or idx.size <= spec.minority_identity_size:
            keep[idx] = True
        else:
            chosen = rng.choice(idx, size=spec.minority_identity_size, replace=False)
            keep[chosen] = True
    new_id = {int(old): new for new, old in enumerate(order)}
    rows = np.flatnonzero(keep)
    labels = np.array([new_id[int(dataset.labels[i])] for i in rows], dtype=np.int64)
    return make_embedding_set(
        dataset.features[rows],
        labels,
        name=f"{dataset.name}-m{m}-n{spec.minority_identity_size}",
        normalize=False,
    )
