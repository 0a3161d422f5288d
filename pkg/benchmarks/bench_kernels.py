"""Time the numba kernels against their numpy fallbacks on identical inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is warmed up once (numba compiles on first call) and the outputs
of the two backends are compared before timing.
"""

import argparse
import time

import numpy as np

from lmdp_lab import _kernels as k


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    L, S, A, H, n = 4, 6, 3, 8, 200_000
    T = rng.dirichlet(np.ones(S), size=(L, S, A))
    nu = rng.dirichlet(np.ones(S), size=L)
    rho = rng.dirichlet(np.ones(L))
    table = rng.dirichlet(np.ones(A), size=(H, S))
    u = rng.random((n, 2 * H + 1))
    states = rng.integers(0, S, size=(n, H))
    actions = rng.integers(0, A, size=(n, H - 1))
    logs = (np.log(rho), np.log(nu), np.log(T))
    yield (
        "sample_markov n=200k H=8",
        lambda: k._sample_markov_nb(rho, nu, T, table, u),
        lambda: k.sample_markov_numpy(rho, nu, T, table, u),
    )
    yield (
        "component_loglik n=200k L=4",
        lambda: k._component_loglik_nb(*logs, states, actions),
        lambda: k.component_loglik_numpy(*logs, states, actions),
    )
    yield (
        "sieve_scan d=20 N=40 sym",
        lambda: k._sieve_scan_nb(20, 40, 5, True),
        lambda: k.sieve_scan_numpy(20, 40, 5, True),
    )


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not hasattr(k, "_sample_markov_nb"):
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}  equal")
    for name, fast, slow in cases(rng):
        same = _same(fast(), slow())
        tn = _best(fast, args.repeat)
        tp = _best(slow, args.repeat)
        print(f"{name:32s} {tn * 1e3:9.2f}ms {tp * 1e3:9.2f}ms {tp / tn:7.1f}x  {same}")


if __name__ == "__main__":
    main()
