"""Separation diagnostics: strong separation, decodability and varpi profiles.

All pairs ``(m, l)`` range over the support of ``rho``. The h-step
trajectory distribution of a component started at ``s`` covers
``(a_1, s_2, ..., a_{h-1}, s_h)``, so ``h = 1`` is the empty trajectory and
every divergence there is zero.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .core import markov_table


@dataclass(frozen=True)
class SeparationWitness:
    m: int
    l: int
    s: int
    a: int
    value: float


@dataclass(frozen=True)
class SeparationProfile:
    """Lower bounds ``varpi(1..h_max)``; ``values[h-1]`` is ``varpi(h)``."""

    values: np.ndarray
    scope: str = "all_policies"
    detail: dict = field(default_factory=dict)

    @property
    def h_max(self):
        return len(self.values)

    def __call__(self, h):
        return float(self.values[h - 1])

    def inverse(self, x):
        """Smallest ``h`` with ``varpi(h) >= x``; ``inf`` when not reached within ``h_max``."""
        hit = np.flatnonzero(self.values >= x)
        return int(hit[0]) + 1 if hit.size else np.inf

    def is_nondecreasing(self):
        v = self.values
        return bool(np.all(v[1:] >= v[:-1]))


def _pairs(model):
    sup = model.support
    if len(sup) < 2:
        raise ValueError("separation needs at least two components with positive weight")
    return list(combinations(sup.tolist(), 2))


def min_pairwise_tv(model):
    """Smallest TV between matching transition rows of two components, with a witness."""
    best = None
    for m, l in _pairs(model):
        d = 0.5 * np.abs(model.T[m] - model.T[l]).sum(axis=-1)  # (S, A)
        s, a = np.unravel_index(np.argmin(d), d.shape)
        if best is None or d[s, a] < best.value:
            best = SeparationWitness(m, l, int(s), int(a), float(d[s, a]))
    return best.value, best


def is_n_step_decodable(model, N):
    """True iff every length-``N`` prefix is reachable in at most one component.

    Walks ``(state, set of components still consistent)`` nodes from every
    start state; a node is dropped once at most one component remains.
    """
    if not 1 <= N <= model.H:
        raise ValueError("N must lie in 1..H")
    sup = tuple(model.support.tolist())
    if len(sup) < 2:
        return True
    pos = model.T > 0  # (L, S, A, S)
    frontier = {(s, sup) for s in range(model.S)}
    for _ in range(N - 1):
        nxt = set()
        for s, ms in frontier:
            for a in range(model.A):
                for s2 in range(model.S):
                    keep = tuple(m for m in ms if pos[m, s, a, s2])
                    if len(keep) >= 2:
                        nxt.add((s2, keep))
        frontier = nxt
        if not frontier:
            return True
    return False


def _root_kernel(model, m, l):
    return np.sqrt(model.T[m] * model.T[l])  # (S, A, S)


def _profile_values(bc):
    """``-log`` of Bhattacharyya coefficients with ``inf`` for zero."""
    bc = np.asarray(bc, dtype=np.float64)
    with np.errstate(divide="ignore"):
        out = -np.log(np.minimum(bc, 1.0))
    # rounding can make an exact zero come out as -0.0 or a BC slightly above 1
    return np.maximum(out, 0.0)


def db_profile_markov(model, policy, m, l, s_start, h_max, t0=0):
    """Exact ``D_B(h)`` between components ``m`` and ``l`` under a Markov policy.

    The policy is queried at steps ``t0, t0+1, ...``; no trajectories are
    enumerated.
    """
    if m == l:
        raise ValueError("need two distinct components")
    table = markov_table(policy, model)
    if table is None:
        raise TypeError("db_profile_markov needs a Markov-type policy")
    G = _root_kernel(model, m, l)
    v = np.zeros(model.S)
    v[s_start] = 1.0
    bc = [1.0]
    for j in range(h_max - 1):
        v = np.einsum("s,sa,sat->t", v, table[t0 + j], G)
        bc.append(v.sum())
    return SeparationProfile(_profile_values(bc), scope="under_policy", detail={"pair": (m, l), "s": s_start})


def _best_bc(G, h_max):
    """``u[h-1, s]``: the largest BC over policies for ``h``-state trajectories from ``s``.

    ``G`` is the ``(S, A, S)`` root kernel. Also returns the maximizing action
    for each remaining-length and state (``acts[j, s]`` with ``j`` transitions left).
    """
    S = G.shape[0]
    u = np.ones(S)
    us = [u]
    acts = []
    for _ in range(h_max - 1):
        q = G @ u  # (S, A)
        acts.append(np.argmax(q, axis=1))
        u = q.max(axis=1)
        us.append(u)
    return np.array(us), acts


def min_db_over_policies(model, m, l, s_start, h, return_policy=False):
    """Smallest ``D_B`` over all policies between the ``h``-state trajectories of ``m`` and ``l``.

    Backward DP over deterministic Markov policies, which attain the largest
    Bhattacharyya coefficient. With ``return_policy`` the maximizing actions
    ``acts[j][s]`` for step ``j`` (0-indexed from the start) are returned too.
    """
    if m == l:
        raise ValueError("need two distinct components")
    us, acts = _best_bc(_root_kernel(model, m, l), h)
    val = float(_profile_values(us[h - 1, s_start]))
    if return_policy:
        # acts[k] is for k+1 transitions left; step j has h-1-j left
        return val, [acts[h - 2 - j] for j in range(h - 1)]
    return val


def certified_varpi(model, h_max):
    """``varpi(h) = min over pairs and start states of min_db_over_policies``, ``h = 1..h_max``."""
    best = np.zeros(h_max)
    worst_pair = {}
    for m, l in _pairs(model):
        us, _ = _best_bc(_root_kernel(model, m, l), h_max)
        top = us.max(axis=1)
        upd = top > best
        best = np.where(upd, top, best)
        for h in np.flatnonzero(upd):
            worst_pair[int(h) + 1] = (m, l)
    values = _profile_values(best)
    # the BC sequence is nonincreasing in exact arithmetic; drop rounding wiggles
    values = np.maximum.accumulate(values)
    return SeparationProfile(values, scope="all_policies", detail={"worst_pair": worst_pair})


def component_rank(model, m, rtol=1e-9):
    """Numerical rank of the ``S x (S A)`` transition matrix of component ``m``."""
    M = model.T[m].reshape(model.S * model.A, model.S).T
    sv = np.linalg.svd(M, compute_uv=False)
    return int((sv > rtol * sv[0]).sum()) if sv[0] > 0 else 0
