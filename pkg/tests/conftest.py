import numpy as np
import pytest

from lmdp_lab.generators import random_lmdp, random_separated


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_model(rng):
    return random_lmdp(2, 3, 2, 3, rng)


@pytest.fixture
def separated_model(rng):
    return random_separated(2, 3, 2, 4, 0.4, rng)


def random_models(n, seed=0, L=(1, 3), S=(2, 3), A=(2, 2), H=(1, 4)):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield random_lmdp(
            int(rng.integers(L[0], L[1] + 1)),
            int(rng.integers(S[0], S[1] + 1)),
            int(rng.integers(A[0], A[1] + 1)),
            int(rng.integers(H[0], H[1] + 1)),
            rng,
            concentration=0.5,
        )
