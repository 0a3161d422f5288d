"""Random instances with controlled separation, for property tests and sweeps."""

import numpy as np

from ..model import Lmdp


def random_reward(H, S, A, rng):
    """Uniform rewards scaled so that ``sum_h max R_h <= 1``."""
    return rng.random((H, S, A)) / H


def random_lmdp(L, S, A, H, rng, concentration=1.0):
    T = rng.dirichlet(np.full(S, concentration), size=(L, S, A))
    nu = rng.dirichlet(np.full(S, concentration), size=L)
    rho = rng.dirichlet(np.ones(L))
    return Lmdp(rho, nu, T, random_reward(H, S, A, rng), {"generator": "random"})


def random_separated(L, S, A, H, delta, rng, base_concentration=1.0):
    """Every pair of components is exactly ``delta`` apart in TV at every ``(s, a)``.

    Row ``(m, s, a)`` is ``(1 - delta) p + delta e_{sigma(m)}`` with a shared
    random base ``p`` and an injective random ``sigma``; needs ``L <= S``.
    """
    if L > S:
        raise ValueError("this construction needs L <= S")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    T = np.empty((L, S, A, S))
    for s in range(S):
        for a in range(A):
            p = rng.dirichlet(np.full(S, base_concentration))
            sigma = rng.permutation(S)[:L]
            for m in range(L):
                row = (1 - delta) * p
                row[sigma[m]] += delta
                T[m, s, a] = row
    nu = np.tile(rng.dirichlet(np.ones(S)), (L, 1))
    rho = rng.dirichlet(np.ones(L))
    meta = {"generator": "random_separated", "delta": float(delta)}
    return Lmdp(rho, nu, T, random_reward(H, S, A, rng), meta)


def optimistic_pair(S=3, A=2, H=4, delta=0.5, seed=0):
    """Two strongly separated models sharing ``R``; the second one is over-optimistic.

    The first model is a random ``delta``-separated instance with reward only
    at the last step in state ``S-1``. The second relabels its actions and
    pushes every transition half-way toward ``S-1``, so its optimal value is
    higher while its greedy policy is poor in the first model. Used as a
    small, fixed class for learner experiments.
    """
    rng = np.random.default_rng(seed)
    base = random_separated(2, S, A, H, delta, rng)
    R = np.zeros((H, S, A))
    R[H - 1, S - 1, :] = 1.0
    first = Lmdp(base.rho, base.nu, base.T, R, {"generator": "optimistic_pair", "role": "truth", "seed": seed})
    goal = np.zeros(S)
    goal[S - 1] = 1.0
    T2 = 0.5 * base.T[:, :, ::-1, :] + 0.5 * goal
    second = Lmdp(base.rho, base.nu, T2, R, {"generator": "optimistic_pair", "role": "optimistic", "seed": seed})
    return first, second
