import dataclasses

import numpy as np
import pytest

from linkgcn import (
    SynthesisSpec,
    SyntheticSpec,
    build_imbalanced_subset,
    generate_synthetic,
    load_embeddings,
    make_embedding_set,
    save_embeddings,
)
from linkgcn.data import DataError

from tests.benchsets import BENCH_SPEC


def test_make_embedding_set_normalizes_and_densifies():
    feats = np.array([[3.0, 4.0], [0.0, 2.0], [1.0, 0.0]])
    ds = make_embedding_set(feats, np.array([7, 7, 3]))
    np.testing.assert_allclose(np.linalg.norm(ds.features, axis=1), 1.0, atol=1e-15)
    # labels densified in sorted original order: 3 -> 0, 7 -> 1
    np.testing.assert_array_equal(ds.labels, [1, 1, 0])
    np.testing.assert_array_equal(ds.label_map, [3, 7])
    assert ds.n == 3 and ds.dim == 2 and ds.n_classes == 2
    np.testing.assert_array_equal(ds.class_sizes(), [1, 2])


@pytest.mark.parametrize(
    "feats,labels,match",
    [
        (np.zeros((1, 2)), np.zeros(1), "N >= 2"),
        (np.zeros((3, 2)), np.zeros(2), "label count"),
        (np.array([[1.0, np.nan], [1.0, 0.0]]), np.zeros(2), "non-finite feature value at row 0"),
        (np.array([[0.0, 0.0], [1.0, 0.0]]), np.zeros(2), "zero-norm feature row 0"),
    ],
)
def test_make_embedding_set_rejects_bad_input(feats, labels, match):
    with pytest.raises(DataError, match=match):
        make_embedding_set(feats, labels)


def test_save_load_round_trip_is_bit_exact(tmp_path, small_ds):
    manifest = save_embeddings(small_ds, tmp_path / "ds.json")
    back = load_embeddings(manifest)
    np.testing.assert_array_equal(back.features, small_ds.features)
    np.testing.assert_array_equal(back.labels, small_ds.labels)
    assert back.name == small_ds.name


def test_load_rejects_corrupt_files(tmp_path, small_ds):
    manifest = save_embeddings(small_ds, tmp_path / "ds.json")
    feat_path = tmp_path / "ds.lbem"
    raw = bytearray(feat_path.read_bytes())

    feat_path.write_bytes(b"XXXX" + bytes(raw[4:]))
    with pytest.raises(DataError, match="bad magic"):
        load_embeddings(manifest)

    feat_path.write_bytes(bytes(raw[:-4]))
    with pytest.raises(DataError, match="payload size"):
        load_embeddings(manifest)

    feat_path.write_bytes(bytes(raw))
    (tmp_path / "ds.labels.txt").write_text("1\nnope\n")
    with pytest.raises(DataError, match="malformed label file"):
        load_embeddings(manifest)


def test_load_rejects_label_count_mismatch(tmp_path, small_ds):
    manifest = save_embeddings(small_ds, tmp_path / "ds.json")
    (tmp_path / "ds.labels.txt").write_text("0\n1\n")
    with pytest.raises(DataError, match="label file has 2 rows"):
        load_embeddings(manifest)


def test_generate_synthetic_is_deterministic_and_unit_norm():
    spec = SyntheticSpec(class_count=4, sizes=(5, 5, 5, 5), dim=6, sigma=0.2, seed=3)
    a = generate_synthetic(spec)
    b = generate_synthetic(spec)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_allclose(np.linalg.norm(a.features, axis=1), 1.0, atol=1e-6)
    np.testing.assert_array_equal(a.class_sizes(), [5, 5, 5, 5])


def test_generate_synthetic_per_class_sigma_controls_spread():
    spec = SyntheticSpec(
        class_count=2, sizes=(200, 200), dim=8, sigma=(0.02, 0.3), separation=2.0, seed=1
    )
    ds = generate_synthetic(spec)
    spread = []
    for c in (0, 1):
        rows = ds.features[ds.labels == c]
        spread.append(np.linalg.norm(rows - rows.mean(axis=0), axis=1).mean())
    assert spread[0] < spread[1]


def test_satellite_layout_places_tails_near_parents():
    ds = generate_synthetic(BENCH_SPEC)
    assert ds.n == 5 * 100 + 45 * 3
    np.testing.assert_array_equal(ds.class_sizes(), [100] * 5 + [3] * 45)
    # every tail-class centroid must be closer to some anchor centroid than
    # the anchors are to each other's satellites on average
    centroids = np.stack([ds.features[ds.labels == c].mean(axis=0) for c in range(50)])
    for t in range(5, 50):
        d = np.linalg.norm(centroids[:5] - centroids[t], axis=1)
        assert d.min() < 1.0


@pytest.mark.parametrize(
    "patch,match",
    [
        (dict(sizes=(5,)), "one entry per class"),
        (dict(sigma=(0.1,)), "one spread per class"),
        (dict(sigma=-1.0), "finite and positive"),
        (dict(separation=0.0), "separation must be finite and positive"),
        (dict(max_separation=0.5), "max_separation must be >= separation"),
        (dict(parents=(0, -1)), None),  # valid: class 0 orbits anchor 1? no — see below
    ],
)
def test_synthetic_spec_validation(patch, match):
    base = SyntheticSpec(class_count=2, sizes=(4, 4), dim=3, separation=1.0)
    spec = dataclasses.replace(base, **patch)
    if match is None:
        # parents=(0, -1): class 0 claims parent 0, which is not an anchor
        with pytest.raises(DataError, match="not an anchor"):
            spec.validate()
    else:
        with pytest.raises(DataError, match=match):
            spec.validate()


def test_satellite_spec_requires_orbit_and_anchor():
    base = SyntheticSpec(class_count=2, sizes=(4, 4), dim=3)
    with pytest.raises(DataError, match="orbit range is required"):
        dataclasses.replace(base, parents=(-1, 0)).validate()
    with pytest.raises(DataError, match="at least one class must be an anchor"):
        dataclasses.replace(base, parents=(0, 1), orbit=(0.5, 1.0)).validate()
    with pytest.raises(DataError, match="orbit must be a finite range"):
        dataclasses.replace(base, parents=(-1, 0), orbit=(0.0, 1.0)).validate()


def test_build_imbalanced_subset_keeps_heads_trims_tails():
    spec = SyntheticSpec(class_count=5, sizes=(30, 20, 20, 10, 4), dim=4, seed=2)
    ds = generate_synthetic(spec)
    sub = build_imbalanced_subset(ds, SynthesisSpec(majority_identity_count=2, minority_identity_size=5))
    sizes = sub.class_sizes()
    # heads (30, 20 with tie broken toward lower label) keep all rows
    np.testing.assert_array_equal(sizes[:2], [30, 20])
    # remaining classes clipped to min(size, 5)
    np.testing.assert_array_equal(np.sort(sizes[2:]), [4, 5, 5])


def test_build_imbalanced_subset_preserves_row_order_and_features():
    spec = SyntheticSpec(class_count=3, sizes=(6, 6, 6), dim=4, seed=5)
    ds = generate_synthetic(spec)
    sub = build_imbalanced_subset(ds, SynthesisSpec(majority_identity_count=1, minority_identity_size=2))
    # every kept row exists in the source, in the same relative order
    src_rows = {row.tobytes(): i for i, row in enumerate(ds.features)}
    positions = [src_rows[row.tobytes()] for row in sub.features]
    assert positions == sorted(positions)


def test_build_imbalanced_subset_rejects_m_over_class_count(small_ds):
    with pytest.raises(DataError, match="exceeds class count"):
        build_imbalanced_subset(small_ds, SynthesisSpec(majority_identity_count=99, minority_identity_size=1))


def test_subset_is_deterministic_per_seed(small_ds):
    spec = SynthesisSpec(majority_identity_count=2, minority_identity_size=2, seed=11)
    a = build_imbalanced_subset(small_ds, spec)
    b = build_imbalanced_subset(small_ds, spec)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)
