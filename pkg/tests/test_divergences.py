import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmdp_lab import divergences as dv


def _dist_pair(n_max=6):
    return st.integers(1, n_max).flatmap(
        lambda n: st.tuples(
            st.lists(st.floats(0, 1), min_size=n, max_size=n),
            st.lists(st.floats(0, 1), min_size=n, max_size=n),
        )
    )


def _norm(x):
    x = np.asarray(x) + 1e-3
    return x / x.sum()


def test_known_values():
    p, q = np.array([0.5, 0.5]), np.array([1.0, 0.0])
    assert dv.tv(p, q) == pytest.approx(0.5)
    assert dv.bhattacharyya_coefficient(p, q) == pytest.approx(np.sqrt(0.5))
    assert dv.hellinger_sq(p, q) == pytest.approx(1 - np.sqrt(0.5))


def test_disjoint_supports():
    p, q = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert dv.tv(p, q) == 1.0
    assert dv.bhattacharyya(p, q) == np.inf
    assert dv.hellinger_sq(p, q) == pytest.approx(1.0)


def test_identical_is_zero():
    p = np.array([0.2, 0.3, 0.5])
    assert dv.tv(p, p) == 0.0
    assert dv.bhattacharyya(p, p) == 0.0
    assert dv.hellinger_sq(p, p) == pytest.approx(0.0, abs=1e-16)


@pytest.mark.parametrize(
    "p, q",
    [([0.5, 0.6], [0.5, 0.5]), ([-0.1, 1.1], [0.5, 0.5]), ([0.5, 0.5], [0.2, 0.3, 0.5]), ([[0.5, 0.5]], [[0.5, 0.5]])],
)
def test_invalid_inputs(p, q):
    with pytest.raises(ValueError):
        dv.tv(p, q)


@settings(max_examples=200, deadline=None)
@given(_dist_pair())
def test_hellinger_bhattacharyya_identity(pair):
    p, q = _norm(pair[0]), _norm(pair[1])
    assert dv.hellinger_sq(p, q) == pytest.approx(1 - np.exp(-dv.bhattacharyya(p, q)), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(_dist_pair())
def test_tv_hellinger_chain(pair):
    p, q = _norm(pair[0]), _norm(pair[1])
    t, h2, db = dv.tv(p, q), dv.hellinger_sq(p, q), dv.bhattacharyya(p, q)
    assert h2 <= t + 1e-12
    assert t <= np.sqrt(h2 * (2 - h2)) + 1e-12
    assert t <= np.sqrt(2 * h2) + 1e-12
    if t < 1:
        assert db >= -0.5 * np.log(1 - t**2) - 1e-12
    assert db >= 0.5 * t**2 - 1e-12


def test_product_tensorizes_bc(rng):
    ps = [rng.dirichlet(np.ones(3)) for _ in range(3)]
    qs = [rng.dirichlet(np.ones(3)) for _ in range(3)]
    lhs = dv.bhattacharyya(dv.product_dist(ps), dv.product_dist(qs))
    rhs = sum(dv.bhattacharyya(p, q) for p, q in zip(ps, qs))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_product_order():
    out = dv.product_dist([np.array([0.25, 0.75]), np.array([0.5, 0.5])])
    np.testing.assert_allclose(out, [0.125, 0.125, 0.375, 0.375])


def test_mixture():
    out = dv.mixture([0.25, 0.75], [[1, 0], [0, 1]])
    np.testing.assert_allclose(out, [0.25, 0.75])


def test_left_inverse(rng):
    L, n = 3, 30
    M = np.zeros((n, L))
    for m in range(L):
        M[m * 10 : (m + 1) * 10, m] = rng.dirichlet(np.ones(10))
    M = 0.98 * M + 0.02 / n
    Mp = dv.left_inverse(M)
    np.testing.assert_allclose(Mp @ M, np.eye(L), atol=1e-9)
    assert dv.l1_operator_norm(Mp) <= 2 + 1e-9


def test_left_inverse_rejects_close_columns():
    M = np.array([[0.5, 0.6], [0.5, 0.4]])
    with pytest.raises(ValueError, match="separated"):
        dv.left_inverse(M)
