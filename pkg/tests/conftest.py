from __future__ import annotations

import pytest

from tests import benchsets


@pytest.fixture(scope="session")
def bench_train():
    return benchsets.bench_imbalanced()


@pytest.fixture(scope="session")
def bench_eval():
    return benchsets.bench_balanced()


@pytest.fixture(scope="session")
def small_ds():
    return benchsets.small_set()
