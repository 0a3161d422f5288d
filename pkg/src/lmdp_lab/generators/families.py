"""Separated distribution families whose H-fold mixtures are nearly identical.

A family is a list of component distributions ``mus`` over a common outcome
set plus ``L`` mixing weights ``xis`` over the components. The builders here
follow the recipe: pick well separated points, map each to a ``Q_x``
distribution, and split a null vector of the moment system into two mixing
weights that agree on all low-order moments.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement

import numpy as np

from .. import _kernels
from .._config import enumeration_budget
from ..divergences import as_dist, product_dist

DELTA_BAR_FACTOR = 4  # the perturbed constructions use delta_bar = 4 delta


def qx_dist(x):
    """``Q_x`` over ``[2d]``: coordinate ``j`` splits mass ``1/d`` as ``(1+x_j)/2d, (1-x_j)/2d``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.ndim != 1 or np.any(np.abs(x) > 1):
        raise ValueError("Q_x needs a vector with entries in [-1, 1]")
    d = x.shape[0]
    out = np.empty(2 * d)
    out[0::2] = (1 + x) / (2 * d)
    out[1::2] = (1 - x) / (2 * d)
    return out


def _bits_to_signs(words, d):
    bits = (words[:, None] >> np.arange(d - 1, -1, -1)) & 1
    return 1 - 2 * bits.astype(np.int64)  # bit 0 -> +1


def greedy_packing(N, d, symmetric=False):
    """``N`` sign vectors in ``{-1, 1}^d`` with pairwise l1 distance at least ``d/2``.

    Scans ``{-1, 1}^d`` in Gray-code order and keeps a vector unless it lies
    strictly inside the ``d/2`` l1 ball of an earlier pick (or, when
    ``symmetric``, of an earlier pick's negation). Vectors exactly at
    distance ``d/2`` are kept.
    """
    if N < 1 or d < 1:
        raise ValueError("need N >= 1 and d >= 1")
    need = math.ceil(11 * math.log(2 * N if symmetric else N)) if N >= 2 else 1
    if d < need:
        raise ValueError(f"d = {d} is below the packing threshold {need}")
    if d > 40:
        raise ValueError("d > 40 is beyond a practical sieve over 2^d words")
    # l1 distance between sign vectors is twice the Hamming distance
    min_hamming = math.ceil(d / 4)
    words = _kernels.sieve_scan(d, N, min_hamming, symmetric)
    if len(words) < N:
        raise RuntimeError(f"sieve exhausted after {len(words)} of {N} vectors")
    return _bits_to_signs(np.asarray(words, dtype=np.int64), d)


def monomial_exponents(d, max_degree):
    """All exponent vectors ``k`` in ``N^d`` with ``|k| <= max_degree``."""
    out = []
    for deg in range(max_degree + 1):
        for combo in combinations_with_replacement(range(d), deg):
            k = np.zeros(d, dtype=np.int64)
            for j in combo:
                k[j] += 1
            out.append(k)
    return np.array(out, dtype=np.int64).reshape(-1, d)


def moment_system(xs, K):
    """Rows are monomials of order ``< K`` evaluated at the points ``xs``."""
    xs = np.asarray(xs, dtype=np.float64)
    ks = monomial_exponents(xs.shape[1], K - 1)
    return np.prod(xs[None, :, :] ** ks[:, None, :], axis=2)


def moment_matching(xs, K, tol=1e-9):
    """Two disjointly supported weightings of ``xs`` that agree on all moments of order ``< K``.

    Takes the right singular vector of the smallest singular value of the
    moment system, flips its sign so the largest entry is positive, and
    normalizes its positive and negative parts.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[:, None]
    N, d = xs.shape
    if K < 1:
        raise ValueError("K must be at least 1")
    n_eq = math.comb(K - 1 + d, d)
    if N < n_eq + 1:
        raise ValueError(f"need N >= C(K+d-1, d) + 1 = {n_eq + 1} points, got {N}")
    M = moment_system(xs, K)
    _, sv, vt = np.linalg.svd(M, full_matrices=True)
    v = vt[-1]
    scale = max(1.0, np.linalg.norm(M))
    if np.linalg.norm(M @ v) > tol * scale:
        raise np.linalg.LinAlgError("moment system has no certified null vector")
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    pos, neg = np.clip(v, 0, None), np.clip(-v, 0, None)
    if pos.sum() <= 0 or neg.sum() <= 0:
        raise np.linalg.LinAlgError("null vector does not split into two distributions")
    return pos / pos.sum(), neg / neg.sum()


def moment_gap(xs, xi0, xi1, K):
    """Largest absolute difference of mixed moments of order ``< K``."""
    M = moment_system(xs, K)
    return float(np.abs(M @ (np.asarray(xi0) - np.asarray(xi1))).max())


def tensor_moment_gap_sq(xs, xi0, xi1, ell):
    """``||E_xi0 x^{(x) ell} - E_xi1 x^{(x) ell}||_2^2`` by explicit tensor powers."""
    xs = np.asarray(xs, dtype=np.float64)
    diff = np.zeros(xs.shape[1] ** ell)
    for w, x in zip(np.asarray(xi0) - np.asarray(xi1), xs):
        t = np.ones(1)
        for _ in range(ell):
            t = np.kron(t, x)
        diff += w * t
    return float(diff @ diff)


def unif_moments_bound(xs, xi0, xi1, H):
    """Right-hand side ``1/4 sum_l C(H, l) d^-l ||Delta_l||^2`` of the moment inequality (a squared TV bound)."""
    d = np.asarray(xs).shape[1]
    return 0.25 * sum(math.comb(H, l) * d ** (-l) * tensor_moment_gap_sq(xs, xi0, xi1, l) for l in range(H + 1))


def matching_tail_bound(H, K, delta_inf):
    """``sum_{k=K}^{H} (e H delta_inf^2 / K)^k``: bound on the squared TV of the matched mixtures."""
    r = math.e * H * delta_inf**2 / K
    return float(sum(r**k for k in range(K, H + 1)))


@dataclass
class Family:
    """``mus[i]`` over ``n_outcomes`` symbols; ``xis[k]`` mixing weights over the ``mus``."""

    mus: np.ndarray
    xis: np.ndarray
    H: int
    delta: float
    gamma: float
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mus = np.asarray(self.mus, dtype=np.float64)
        self.xis = np.asarray(self.xis, dtype=np.float64)
        for row in self.mus:
            as_dist(row, atol=1e-10)
        for row in self.xis:
            as_dist(row, atol=1e-10)
        if self.xis.shape[1] != self.mus.shape[0]:
            raise ValueError("mixing weights must range over the component distributions")

    @property
    def L(self):
        return self.xis.shape[0]

    @property
    def n_components(self):
        return self.mus.shape[0]

    @property
    def n_outcomes(self):
        return self.mus.shape[1]

    def used(self):
        return np.flatnonzero((self.xis > 0).any(axis=0))

    def restrict(self, L):
        """Keep the first ``L`` mixing weights."""
        if not 1 <= L <= self.L:
            raise ValueError(f"cannot keep {L} of {self.L} mixing weights")
        return Family(self.mus, self.xis[:L], self.H, self.delta, self.gamma, dict(self.info, restricted_from=self.L))

    def mixture_power(self, k):
        """``Q_k = E_{i ~ xi_k} mu_i^{(x) H}`` as a vector over ``n_outcomes^H``."""
        out = np.zeros(self.n_outcomes**self.H)
        for i in np.flatnonzero(self.xis[k] > 0):
            out += self.xis[k, i] * product_dist([self.mus[i]] * self.H)
        return out

    def min_pairwise_tv(self):
        used = self.used()
        if len(used) < 2:
            return np.inf
        sub = self.mus[used]
        return float(min(0.5 * np.abs(sub[i] - sub[j]).sum() for i, j in combinations(range(len(used)), 2)))

    def supports_disjoint(self):
        pos = self.xis > 0
        return bool(np.all(pos.sum(axis=0) <= 1))

    def max_mixture_tv(self, budget=None):
        """Exact ``max_k TV(Q_k, Q_1)``, or ``None`` when ``n_outcomes^H`` exceeds the budget."""
        if self.n_outcomes**self.H * max(1, len(self.used())) > enumeration_budget(budget):
            return None
        q1 = self.mixture_power(0)
        return float(max(0.5 * np.abs(self.mixture_power(k) - q1).sum() for k in range(self.L)))

    def verify(self, budget=None, tol=1e-9):
        """Re-check the three family clauses; the TV clause is exact when enumerable."""
        tv = self.max_mixture_tv(budget)
        report = {
            "supports_disjoint": self.supports_disjoint(),
            "min_pairwise_tv": self.min_pairwise_tv(),
            "max_mixture_tv": tv,
        }
        report["separated"] = report["min_pairwise_tv"] >= self.delta - tol
        report["close"] = None if tv is None else tv <= self.gamma + tol
        report["ok"] = report["supports_disjoint"] and report["separated"] and report["close"] is not False
        return report


def grid_points(N, d, delta_inf, spacing):
    """``N`` points of the grid ``spacing * Z^d`` inside ``[-delta_inf, delta_inf]^d``, evenly picked."""
    per = int(math.floor(2 * delta_inf / spacing + 1e-12)) + 1
    if per**d < N:
        raise ValueError(f"grid holds {per ** d} points, {N} needed")
    axis = -delta_inf + spacing * np.arange(per)
    picks = np.unique(np.round(np.linspace(0, per**d - 1, N)).astype(np.int64))
    idx = np.array(np.unravel_index(picks, (per,) * d)).T
    return axis[idx]


def _two_family(points, K, H, delta, gamma, info):
    xi0, xi1 = moment_matching(points, K)
    mus = np.array([qx_dist(x) for x in points])
    info = dict(info, points=points.tolist(), K=K, moment_gap=moment_gap(points, xi0, xi1, K))
    return Family(mus, np.array([xi0, xi1]), H, delta, gamma, info)


def preset_exact(H, delta):
    """Zero-gap preset: ``delta_inf = 1``, ``K = H + 1``, ``d = ceil(4 e^2 delta H)``."""
    if not 0 < delta <= 1 / (4 * math.e**2):
        raise ValueError("delta must lie in (0, 1/(4e^2)]")
    d = math.ceil(4 * math.e**2 * delta * H)
    K = H + 1
    N = math.comb(K + d - 1, d) + 1
    pts = grid_points(N, d, 1.0, 2 * d * delta)
    return _two_family(pts, K, H, delta, 0.0, {"preset": "a", "d": d, "delta_inf": 1.0})


def preset_tradeoff(H, delta, lam, d=None):
    """Small-gap preset: ``K = ceil(lam d)``, ``delta_inf = 2 e^2 delta (lam + 1)``.

    ``d`` defaults to the smallest value with ``d >= lam 4 e^7 delta^2 H``.
    The certificate is ``gamma = sqrt(sum_{k=K}^{H} (e H delta_inf^2 / K)^k)``.
    """
    if not 0 < delta <= 1 / (4 * math.e**2):
        raise ValueError("delta must lie in (0, 1/(4e^2)]")
    if not 1 <= lam <= 1 / (4 * math.e**2 * delta):
        raise ValueError("lam must lie in [1, 1/(4 e^2 delta)]")
    d_min = max(1, math.ceil(lam * 4 * math.e**7 * delta**2 * H))
    d = d_min if d is None else d
    if d < d_min:
        raise ValueError(f"d must be at least {d_min}")
    K = math.ceil(lam * d)
    delta_inf = 2 * math.e**2 * delta * (lam + 1)
    N = math.comb(K + d - 1, d) + 1
    pts = grid_points(N, d, delta_inf, 2 * d * delta)
    gamma = math.sqrt(matching_tail_bound(H, K, delta_inf))
    return _two_family(pts, K, H, delta, gamma, {"preset": "b", "d": d, "delta_inf": delta_inf, "lam": lam})


def tensor_family(fam, r):
    """Binary-indexed ``r``-fold tensoring of a two-weight family.

    Weight ``m`` (bits ``m_r..m_1``) is ``xi_{m_r} (x) ... (x) xi_{m_1}`` and
    component ``(k_1, ..., k_r)`` is ``mu_{k_1} (x) ... (x) mu_{k_r}``; both are
    indexed lexicographically with the first factor slowest.
    """
    if fam.L != 2:
        raise ValueError("tensoring needs a family with exactly two mixing weights")
    if r < 1:
        raise ValueError("r must be positive")
    if r == 1:
        return fam
    N = fam.n_components
    mus = np.empty((N**r, fam.n_outcomes**r))
    for flat in range(N**r):
        ks = np.unravel_index(flat, (N,) * r)
        mus[flat] = product_dist([fam.mus[k] for k in ks])
    xis = np.empty((2**r, N**r))
    for m in range(2**r):
        bits = [(m >> (r - 1 - j)) & 1 for j in range(r)]  # m_r first
        xis[m] = product_dist([fam.xis[b] for b in bits])
    info = dict(fam.info, tensor_r=r)
    return Family(mus, xis, fam.H, fam.delta, r * fam.gamma, info)


def make_family(r, d, H, delta):
    """Computable family: packing, ``Q`` maps scaled by ``4 delta``, moment matching with ``K = ceil(d/60)``.

    Produces a ``(2^r, H, delta, r 2^{-(K-1)/2}, N^r)``-family over ``[2d]^r``
    with ``N = C(K+d-1, d) + 1`` packed points.
    """
    if not 0 < delta <= 0.25:
        raise ValueError("delta must lie in (0, 1/4]")
    if d < 480 * math.e * H * delta**2:
        raise ValueError(f"d = {d} is below 480 e H delta^2 = {480 * math.e * H * delta ** 2:.4g}")
    K = math.ceil(d / 60)
    N = math.comb(K + d - 1, d) + 1
    xs = greedy_packing(N, d)
    dbar = DELTA_BAR_FACTOR * delta
    pts = dbar * xs.astype(np.float64)
    gamma = 2 ** (-(K - 1) / 2)
    base = _two_family(pts, K, H, delta, gamma, {"preset": "compute", "d": d, "delta_bar": dbar})
    base.info["gamma_tail_bound"] = math.sqrt(matching_tail_bound(H, K, dbar))
    return tensor_family(base, r)
