"""Combination locks: the plain lock and its N-step decodable variant.

State 0 of the plain lock is the failure sink ``s-``; states ``1..n`` are the
progress states ``s+_1..s+_n``. Lock strings ``theta`` are sequences of
``n-1`` action indices (a string of digits is accepted) or ``"reference"``.
"""

import numpy as np

from ..model import Lmdp


def _parse_theta(theta, n, A):
    if isinstance(theta, str):
        if theta == "reference":
            return None
        theta = [int(c) for c in theta]
    theta = [int(a) for a in theta]
    if len(theta) != n - 1:
        raise ValueError(f"lock string must have length n-1 = {n - 1}")
    if any(not 0 <= a < A for a in theta):
        raise ValueError("lock action out of range")
    return theta


def comb_lock(n, A, H, theta):
    """The lock ``M_theta`` (or the reference model for ``theta="reference"``)."""
    if n < 1 or A < 2 or H < n + 1:
        raise ValueError("need n >= 1, A >= 2 and H >= n+1")
    code = _parse_theta(theta, n, A)
    S = n + 1
    sink = 0
    T = np.zeros((n, S, A, S))
    T[:, sink, :, sink] = 1.0
    if code is None:
        for h in range(1, n + 1):
            T[:, h, :, sink] = 1.0 / (n - h + 1)
            if h < n:
                T[:, h, :, h + 1] = (n - h) / (n - h + 1)
    else:
        # component index c holds the lock's m = c + 1
        for c in range(n):
            m = c + 1
            for h in range(1, n + 1):
                if m == 1:
                    if h == n:
                        T[c, h, :, h] = 1.0
                    else:
                        T[c, h, :, sink] = 1.0
                        T[c, h, code[h - 1], sink] = 0.0
                        T[c, h, code[h - 1], h + 1] = 1.0
                elif h < m - 1:
                    T[c, h, :, h + 1] = 1.0
                elif h == m - 1:
                    T[c, h, :, h + 1] = 1.0
                    T[c, h, code[h - 1], h + 1] = 0.0
                    T[c, h, code[h - 1], sink] = 1.0
                elif h < n:
                    T[c, h, :, sink] = 1.0
                    T[c, h, code[h - 1], sink] = 0.0
                    T[c, h, code[h - 1], h + 1] = 1.0
                else:
                    T[c, h, :, sink] = 1.0
    nu = np.zeros((n, S))
    nu[:, 1] = 1.0
    R = np.zeros((H, S, A))
    R[n, n, :] = 1.0
    meta = {"generator": "comb_lock", "n": n, "A": A, "H": H, "theta": "reference" if code is None else code}
    return Lmdp(np.full(n, 1.0 / n), nu, T, R, meta)


def lock_sequences(n, H):
    """State sequences ``s_h`` (h = 1..n) and ``s_{n,+}`` of the plain lock."""
    seqs = {h: tuple(range(1, h + 1)) + (0,) * (H - h) for h in range(1, n + 1)}
    seqs["n+"] = tuple(range(1, n + 1)) + (n,) * (H - n)
    return seqs


def lock_weight(policy, theta, n, A):
    """``w_theta(pi)``: probability that ``pi`` plays the lock string along the progress path."""
    code = _parse_theta(theta, n, A)
    w = 1.0
    states = np.arange(1, n + 1, dtype=np.int64)[None, :]
    acts = np.asarray(code, dtype=np.int64)[None, :]
    for t in range(n - 1):
        w *= float(policy.probs(t, states[:, : t + 1], acts[:, :t])[0, code[t]])
    return w


class DecodableLockStates:
    """Index map for the decodable lock's ``3N - 1`` states."""

    def __init__(self, N, n):
        self.N, self.n, self.k = N, n, N - n
        k = self.k
        self.plus = {i: i + k - 1 for i in range(-k + 1, n + k + 1)}  # s+_i
        off = n + 2 * k
        self.minus = {i: off + i - 2 for i in range(2, n + k + 1)}  # s-_i
        off += n + k - 1
        self.terminal = {m: off + m - 1 for m in range(1, n + 1)}
        self.S = off + n
        assert self.S == 3 * N - 1


def comb_lock_decodable(N, n, A, theta=None):
    """The decodable lock with ``H = 2N - n`` (``theta`` defaults to all zeros)."""
    if not (N >= n >= 2) or A < 2:
        raise ValueError("need N >= n >= 2 and A >= 2")
    if N == n:
        # H = n and the reward sits at step n+1: there is no s-_{n+1} and nothing to earn
        raise ValueError("N = n leaves no step for the reward; use N > n")
    idx = DecodableLockStates(N, n)
    k = idx.k
    H = n + 2 * k
    code = _parse_theta([0] * (n - 1) if theta is None else theta, n, A)
    S, P, M, Tm = idx.S, idx.plus, idx.minus, idx.terminal
    T = np.zeros((n, S, A, S))
    for c in range(n):
        m = c + 1
        # dynamics away from the lock states do not depend on theta
        for i in range(-k + 1, 1):
            T[c, P[i], :, P[i + 1]] = 1.0
        for i in range(2, n + k):
            T[c, M[i], :, M[i + 1]] = 1.0
        for s in [M[n + k]] + list(Tm.values()) + [P[i] for i in range(n + 1, n + k + 1)]:
            T[c, s, :, Tm[m]] = 1.0
        for h in range(1, n + 1):
            s = P[h]
            if code is None:
                T[c, s, :, P[h + 1] if h < m else M[h + 1]] = 1.0
            elif m == 1:
                if h == n:
                    T[c, s, :, s] = 1.0
                else:
                    T[c, s, :, M[h + 1]] = 1.0
                    T[c, s, code[h - 1], M[h + 1]] = 0.0
                    T[c, s, code[h - 1], P[h + 1]] = 1.0
            elif h < m - 1:
                T[c, s, :, P[h + 1]] = 1.0
            elif h == m - 1:
                T[c, s, :, P[h + 1]] = 1.0
                T[c, s, code[h - 1], P[h + 1]] = 0.0
                T[c, s, code[h - 1], M[h + 1]] = 1.0
            elif h < n:
                T[c, s, :, M[h + 1]] = 1.0
                T[c, s, code[h - 1], M[h + 1]] = 0.0
                T[c, s, code[h - 1], P[h + 1]] = 1.0
            else:
                T[c, s, :, M[n + 1]] = 1.0
    nu = np.zeros((n, S))
    nu[:, P[-k + 1]] = 1.0
    R = np.zeros((H, S, A))
    R[n + k, P[n], :] = 1.0
    meta = {
        "generator": "comb_lock_decodable",
        "N": N,
        "n": n,
        "A": A,
        "H": H,
        "theta": "reference" if code is None else code,
    }
    return Lmdp(np.full(n, 1.0 / n), nu, T, R, meta)
