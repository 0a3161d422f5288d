"""Exact divergences between finite distributions.

Distributions are plain 1-d float arrays over a contiguous outcome range
``0..n-1``. Every function validates its inputs with :func:`as_dist`.
"""

import numpy as np

ATOL = 1e-12


def as_dist(p, atol=ATOL):
    """Return ``p`` as a float64 array after checking it is a probability vector."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("a distribution must be a non-empty 1-d vector")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("distribution has negative or non-finite weights")
    if abs(p.sum() - 1.0) > atol:
        raise ValueError(f"distribution sums to {p.sum()!r}, not 1")
    return p


def _pair(p, q):
    p, q = as_dist(p), as_dist(q)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape[0]} vs {q.shape[0]}")
    return p, q


def tv(p, q):
    p, q = _pair(p, q)
    return 0.5 * float(np.abs(p - q).sum())


def hellinger_sq(p, q):
    """Squared Hellinger distance with the 1/2 normalization (values in [0, 1])."""
    p, q = _pair(p, q)
    return 0.5 * float(((np.sqrt(p) - np.sqrt(q)) ** 2).sum())


def bhattacharyya_coefficient(p, q):
    p, q = _pair(p, q)
    return float(np.sqrt(p * q).sum())


def bhattacharyya(p, q):
    """``-log sum sqrt(p q)``; ``inf`` exactly when the supports are disjoint."""
    bc = bhattacharyya_coefficient(p, q)
    if bc <= 0.0:
        return np.inf
    # bc can exceed 1 by an ulp for identical inputs
    return max(0.0, -np.log(bc))


def product_dist(ps):
    """Product distribution, indexed lexicographically with the first factor slowest."""
    if len(ps) == 0:
        raise ValueError("product of an empty list of distributions")
    out = np.ones(1)
    for p in ps:
        out = np.kron(out, as_dist(p))
    return out


def mixture(weights, dists):
    """``sum_i weights[i] * dists[i]`` for a stack of distributions (rows)."""
    weights = as_dist(weights)
    dists = np.asarray(dists, dtype=np.float64)
    return weights @ dists


def pairwise_bhattacharyya(M):
    """Matrix of Bhattacharyya divergences between the columns of ``M``."""
    M = np.asarray(M, dtype=np.float64)
    root = np.sqrt(M)
    bc = root.T @ root
    with np.errstate(divide="ignore"):
        out = -np.log(bc)
    return np.maximum(out, 0.0)


def left_inverse(M, check=True):
    """Explicit left inverse of a column-stochastic matrix with well separated columns.

    Builds ``Z[m, o] = P_m(o) / sum_i P_i(o)`` and returns ``inv(Z @ M) @ Z``.
    When the columns are pairwise at Bhattacharyya divergence at least
    ``log(2L)`` the result satisfies ``M+ @ M = I`` with induced l1 norm (max
    absolute column sum) at most 2.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("M must be a matrix whose columns are distributions")
    n_out, L = M.shape
    for m in range(L):
        as_dist(M[:, m])
    if check and L > 1:
        db = pairwise_bhattacharyya(M)
        off = db[~np.eye(L, dtype=bool)]
        if off.min() < np.log(2 * L):
            raise ValueError(
                f"columns not separated enough: min pairwise D_B {off.min():.6g} < log(2L) = {np.log(2 * L):.6g}"
            )
    col = M.sum(axis=1)
    Z = np.zeros((L, n_out))
    nz = col > 0
    Z[:, nz] = M[nz, :].T / col[nz]
    Y = Z @ M
    if np.linalg.cond(Y) > 1e12:
        raise np.linalg.LinAlgError("Z M is numerically singular; columns are not separated")
    return np.linalg.solve(Y, Z)


def l1_operator_norm(A):
    """Induced l1 norm: the largest absolute column sum."""
    return float(np.abs(np.asarray(A)).sum(axis=0).max())
