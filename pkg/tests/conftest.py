import numpy as np
import pytest

from loopfree.model import PotentialModel, Query

T3_UNARY = [0.0, 1.0, 2.0]
T3_PAIRWISE = [[0.0, 0.5, 0.2], [0.1, 0.0, 0.4], [0.3, 0.6, 0.0]]


def make_t3():
    return PotentialModel(T3_UNARY, T3_PAIRWISE)


def random_instance(seed, n_range=(2, 7), l_range=(2, 5), path=False, integer=None):
    """Random (model, query); every third seed uses small integer scores to force ties."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    hi = min(l_range[1], n) if path else l_range[1]
    l = int(rng.integers(l_range[0], max(l_range[0], hi) + 1))
    if integer is None:
        integer = seed % 3 == 0
    if integer:
        model = PotentialModel(rng.integers(-2, 3, n).astype(float), rng.integers(-2, 3, (n, n)).astype(float))
    else:
        model = PotentialModel.random(n, rng)
    return model, Query(int(rng.integers(n)), l)


@pytest.fixture
def t3():
    return make_t3()


@pytest.fixture
def zeros3():
    return PotentialModel.zeros(3)
