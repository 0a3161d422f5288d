"""Hot inner loops, each with a numba version and a pure-numpy fallback.

The backend is chosen once at import time: numba when it imports and the
``LMDP_LAB_NUMBA`` flag is not disabled, numpy otherwise. Both paths consume
the same inputs (random draws are supplied by the caller) so they return
identical results; ``tests/test_kernels.py`` holds them to that.
"""

import numpy as np

from ._config import use_numba

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

BACKEND = "numba" if (njit is not None and use_numba()) else "numpy"


# -- greedy sign-vector sieve ------------------------------------------------


def _gray(i):
    return i ^ (i >> 1)


def sieve_scan_numpy(d, n_picks, min_dist, symmetric, chunk=1 << 16):
    """Scan {0,1}^d in Gray-code order, keeping each word far from all kept ones.

    A word ``x`` survives when its Hamming distance to every kept word is at
    least ``min_dist`` (and, if ``symmetric``, also to every kept word's
    complement). Returns the kept words as integers, at most ``n_picks``.
    """
    picks = np.zeros(n_picks, dtype=np.int64)
    n = 0
    total = 1 << d
    start = 0
    while start < total and n < n_picks:
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        for word in idx ^ (idx >> 1):
            hd = _popcount_array(word ^ picks[:n])
            ok = np.all(hd >= min_dist) and (not symmetric or np.all(d - hd >= min_dist))
            if ok:
                picks[n] = word
                n += 1
                if n == n_picks:
                    break
        start += chunk
    return picks[:n]


_BYTE_POP = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def _popcount_array(x):
    b = np.ascontiguousarray(x, dtype=np.int64).view(np.uint8).reshape(-1, 8)
    return _BYTE_POP[b].sum(axis=1)


def _popcount64(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


if njit is not None:
    _popcount_nb = njit(cache=True)(_popcount64)

    @njit(cache=True)
    def _sieve_scan_nb(d, n_picks, min_dist, symmetric):
        picks = np.zeros(n_picks, dtype=np.int64)
        n = 0
        total = np.int64(1) << d
        i = np.int64(0)
        while i < total and n < n_picks:
            word = i ^ (i >> 1)
            ok = True
            for j in range(n):
                hd = _popcount_nb(word ^ picks[j])
                if hd < min_dist or (symmetric and d - hd < min_dist):
                    ok = False
                    break
            if ok:
                picks[n] = word
                n += 1
            i += 1
        return picks[:n]


def sieve_scan(d, n_picks, min_dist, symmetric):
    if BACKEND == "numba":
        return _sieve_scan_nb(int(d), int(n_picks), int(min_dist), bool(symmetric))
    return sieve_scan_numpy(int(d), int(n_picks), int(min_dist), bool(symmetric))


# -- batched episode sampling for Markov policies ----------------------------


def sample_markov_numpy(rho, nu, T, table, u):
    """Inverse-CDF sampling of ``n`` episodes from uniforms ``u`` of shape ``(n, 2H+1)``.

    Column 0 draws the latent index, column 1 the initial state, then
    alternating action / next-state columns.
    """
    n = u.shape[0]
    H = table.shape[0]
    latent = _inv_cdf(np.broadcast_to(rho, (n, rho.shape[0])), u[:, 0])
    states = np.zeros((n, H), dtype=np.int64)
    actions = np.zeros((n, H), dtype=np.int64)
    s = _inv_cdf(nu[latent], u[:, 1])
    for t in range(H):
        states[:, t] = s
        a = _inv_cdf(table[t, s], u[:, 2 + 2 * t])
        actions[:, t] = a
        if t + 1 < H:
            s = _inv_cdf(T[latent, s, a], u[:, 3 + 2 * t])
    return latent, states, actions


def _inv_cdf(p, u):
    c = np.cumsum(p, axis=1)
    k = (c <= u[:, None]).sum(axis=1)
    # guard against u landing above a cumsum that rounds below 1
    last = p.shape[1] - 1 - np.argmax(p[:, ::-1] > 0, axis=1)
    return np.minimum(k, last)


if njit is not None:

    @njit(cache=True)
    def _draw_nb(p, u):
        c = 0.0
        k = 0
        for i in range(p.shape[0]):
            c += p[i]
            if c <= u:
                k += 1
        last = p.shape[0] - 1
        while last > 0 and p[last] <= 0:
            last -= 1
        return min(k, last)

    @njit(cache=True)
    def _sample_markov_nb(rho, nu, T, table, u):
        n = u.shape[0]
        H = table.shape[0]
        latent = np.zeros(n, dtype=np.int64)
        states = np.zeros((n, H), dtype=np.int64)
        actions = np.zeros((n, H), dtype=np.int64)
        for i in range(n):
            m = _draw_nb(rho, u[i, 0])
            latent[i] = m
            s = _draw_nb(nu[m], u[i, 1])
            for t in range(H):
                states[i, t] = s
                a = _draw_nb(table[t, s], u[i, 2 + 2 * t])
                actions[i, t] = a
                if t + 1 < H:
                    s = _draw_nb(T[m, s, a], u[i, 3 + 2 * t])
        return latent, states, actions


def sample_markov(rho, nu, T, table, u):
    args = (
        np.ascontiguousarray(rho, dtype=np.float64),
        np.ascontiguousarray(nu, dtype=np.float64),
        np.ascontiguousarray(T, dtype=np.float64),
        np.ascontiguousarray(table, dtype=np.float64),
        np.ascontiguousarray(u, dtype=np.float64),
    )
    if BACKEND == "numba":
        return _sample_markov_nb(*args)
    return sample_markov_numpy(*args)


# -- per-component trajectory log-likelihoods --------------------------------


def component_loglik_numpy(log_rho, log_nu, log_T, states, actions):
    """``(n, L)`` array of ``log rho_m + log nu_m(s_1) + sum_t log T_m(s_{t+1}|s_t, a_t)``."""
    n, h = states.shape
    out = log_rho[None, :] + log_nu[:, states[:, 0]].T
    for t in range(h - 1):
        out = out + log_T[:, states[:, t], actions[:, t], states[:, t + 1]].T
    return out


if njit is not None:

    @njit(cache=True)
    def _component_loglik_nb(log_rho, log_nu, log_T, states, actions):
        n, h = states.shape
        L = log_rho.shape[0]
        out = np.empty((n, L))
        for i in range(n):
            for m in range(L):
                acc = log_rho[m] + log_nu[m, states[i, 0]]
                for t in range(h - 1):
                    acc = acc + log_T[m, states[i, t], actions[i, t], states[i, t + 1]]
                out[i, m] = acc
        return out


def component_loglik(log_rho, log_nu, log_T, states, actions):
    states = np.ascontiguousarray(states, dtype=np.int64)
    actions = np.ascontiguousarray(actions, dtype=np.int64)
    if states.shape[1] > 1 and actions.shape[1] < states.shape[1] - 1:
        raise ValueError("need one action per transition")
    if actions.shape[1] == 0:
        actions = np.zeros((states.shape[0], 1), dtype=np.int64)
    if BACKEND == "numba":
        return _component_loglik_nb(
            np.ascontiguousarray(log_rho), np.ascontiguousarray(log_nu), np.ascontiguousarray(log_T), states, actions
        )
    return component_loglik_numpy(log_rho, log_nu, log_T, states, actions)
