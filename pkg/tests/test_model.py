import numpy as np
import pytest

from lmdp_lab import Lmdp, Trajectory
from lmdp_lab.model import decode_prefix, encode_prefix


def _arrays(L=2, S=2, A=2, H=2):
    rho = np.full(L, 1 / L)
    nu = np.full((L, S), 1 / S)
    T = np.full((L, S, A, S), 1 / S)
    R = np.zeros((H, S, A))
    return rho, nu, T, R


def test_valid_model():
    m = Lmdp(*_arrays())
    assert (m.L, m.S, m.A, m.H) == (2, 2, 2, 2)
    assert m.support.tolist() == [0, 1]


@pytest.mark.parametrize(
    "mutate",
    [
        lambda a: a[0].__setitem__(0, 0.7),  # rho not normalized
        lambda a: a[1].__setitem__((0, 0), -0.1),  # negative nu
        lambda a: a[2].__setitem__((0, 0, 0, 0), 0.9),  # row not normalized
        lambda a: a[3].__setitem__((0, 0, 0), 0.9),  # rewards over horizon sum above 1 with the next line
    ],
)
def test_invalid_models(mutate):
    arrs = list(_arrays())
    for a in arrs:
        a.setflags(write=True)
    mutate(arrs)
    if arrs[3].max() > 0:
        arrs[3][1, 0, 0] = 0.9
    with pytest.raises(ValueError):
        Lmdp(*arrs)


def test_dimension_mismatch():
    rho, nu, T, R = _arrays()
    with pytest.raises(ValueError):
        Lmdp(rho, nu[:, :1], T, R)


def test_arrays_are_frozen():
    m = Lmdp(*_arrays())
    with pytest.raises(ValueError):
        m.T[0, 0, 0, 0] = 1.0


def test_support_skips_zero_weight():
    rho, nu, T, R = _arrays(L=3)
    rho = np.array([0.5, 0.0, 0.5])
    assert Lmdp(rho, nu, T, R).support.tolist() == [0, 2]


def test_prefix_code_roundtrip(rng):
    S, A = 3, 2
    for n_states in range(1, 5):
        n = (S * A) ** (n_states - 1) * S
        for code in rng.integers(0, n, size=20):
            st, ac = decode_prefix(int(code), n_states, S, A)
            assert len(st) == n_states and len(ac) == n_states - 1
            assert int(encode_prefix(np.array([st]), np.array([ac]).reshape(1, -1), S, A)[0]) == code


def test_trajectory_prefix():
    tr = Trajectory((0, 1, 1), (1, 0, 1), latent=1)
    p = tr.prefix(2)
    assert p.states == (0, 1) and p.actions == (1,)
    with pytest.raises(ValueError):
        Trajectory((0, 1), (1, 0, 1))
