"""Shared benchmark datasets for the test suite.

BENCH_SPEC is the reference imbalanced set: 5 anchor classes of 100 samples
with 45 three-sample tail classes orbiting them, d=16, unit-normalized. The
tail classes sit on the shoulders of the anchor blobs, so a pivot's expanded
neighbor pool mixes both — the regime the reverse-imbalance sampler targets.
BALANCED_SPEC is the same layout with every class cut to 12 samples, used as
the held-out evaluation set.
"""

from __future__ import annotations

import dataclasses

from linkgcn import SyntheticSpec, generate_synthetic

BENCH_SPEC = SyntheticSpec(
    class_count=50,
    sizes=(100,) * 5 + (3,) * 45,
    dim=16,
    sigma=(0.25,) * 5 + (0.12,) * 45,
    separation=1.0,
    max_separation=1.45,
    seed=42,
    parents=(-1,) * 5 + tuple(i % 5 for i in range(45)),
    orbit=(0.6, 1.1),
)

BALANCED_SPEC = dataclasses.replace(BENCH_SPEC, sizes=(12,) * 50, seed=43)

SMALL_SPEC = SyntheticSpec(
    class_count=6, sizes=(8, 8, 8, 5, 5, 5), dim=8, sigma=0.25, separation=1.0, seed=7
)


def bench_imbalanced():
    return generate_synthetic(BENCH_SPEC)


def bench_balanced():
    return generate_synthetic(BALANCED_SPEC)


def small_set():
    return generate_synthetic(SMALL_SPEC)
