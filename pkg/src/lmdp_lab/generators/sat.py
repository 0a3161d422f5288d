"""Embedding 3SAT formulas into LMDPs.

One component per clause. At step ``h`` the agent writes ``w`` bits of the
assignment as its action; the clause's component jumps to the absorbing
success state as soon as a written bit satisfies it. Reward is paid at the
last step in the success state, so the optimal value is 1 exactly when the
formula is satisfiable.
"""

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from ..model import Lmdp
from .augment import _tensor_component, lift_reward
from .families import DELTA_BAR_FACTOR, greedy_packing, qx_dist


@dataclass(frozen=True)
class SatFormula:
    """``clauses`` hold signed 1-indexed literals: ``3`` is ``x_3``, ``-3`` is ``not x_3``."""

    n: int
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.n < 1 or not clauses:
            raise ValueError("need at least one variable and one clause")
        for c in clauses:
            if not 1 <= len(c) <= 3:
                raise ValueError(f"clause {c} must have 1 to 3 literals")
            if any(l == 0 or abs(l) > self.n for l in c):
                raise ValueError(f"clause {c} names an undeclared variable")

    @property
    def N(self):
        return len(self.clauses)

    def evaluate(self, bits):
        return all(any((bits[abs(l) - 1] == 1) == (l > 0) for l in c) for c in self.clauses)

    def satisfying_assignment(self):
        for bits in product((0, 1), repeat=self.n):
            if self.evaluate(bits):
                return bits
        return None

    def satisfiable(self):
        return self.satisfying_assignment() is not None

    @classmethod
    def random(cls, n, N, rng, width=3):
        clauses = []
        for _ in range(N):
            k = min(width, n)
            vars_ = rng.choice(n, size=k, replace=False) + 1
            signs = rng.choice([-1, 1], size=k)
            clauses.append(tuple(int(v * s) for v, s in zip(vars_, signs)))
        return cls(n, tuple(clauses))


def action_bits(a, w):
    """Bits ``a[1..w]`` of action index ``a``, most significant first."""
    return [(a >> (w - 1 - j)) & 1 for j in range(w)]


def bits_to_actions(bits, w, n_steps):
    bits = list(bits) + [0] * (w * n_steps - len(bits))
    return [int("".join(map(str, bits[h * w : (h + 1) * w])), 2) for h in range(n_steps)]


def _sat_arrays(phi, w):
    H = math.ceil(phi.n / w) + 1
    S, A = H, 2**w
    good = H - 1  # states 0..H-2 are the pending states, H-1 the success state
    T = np.zeros((phi.N, S, A, S))
    for m, clause in enumerate(phi.clauses):
        T[m, good, :, good] = 1.0
        for h in range(1, H):
            for a in range(A):
                bits = action_bits(a, w)
                hit = False
                for j in range(w):
                    var = w * (h - 1) + j + 1
                    if (bits[j] == 1 and var in clause) or (bits[j] == 0 and -var in clause):
                        hit = True
                T[m, h - 1, a, good if hit else min(h + 1, H - 1) - 1] = 1.0
    nu = np.zeros((phi.N, S))
    nu[:, 0] = 1.0
    R = np.zeros((H, S, A))
    R[H - 1, good, :] = 1.0
    return nu, T, R


def sat_to_lmdp(phi, w):
    if w < 1:
        raise ValueError("w must be positive")
    nu, T, R = _sat_arrays(phi, w)
    meta = {"generator": "sat", "n": phi.n, "clauses": [list(c) for c in phi.clauses], "w": w}
    return Lmdp(np.full(phi.N, 1.0 / phi.N), nu, T, R, meta)


def sat_to_separated_lmdp(phi, w, delta):
    """Each clause component split into two copies tagged by ``mu_m^+`` and ``mu_m^-``.

    ``mu_m^{+/-} = Q_{+/- 4 delta x_m}`` for sign vectors ``x_m`` from the
    symmetric packing with ``d = ceil(11 log 2N)``.
    """
    if w < 1:
        raise ValueError("w must be positive")
    dbar = DELTA_BAR_FACTOR * delta
    if not 0 < dbar <= 1:
        raise ValueError("need 0 < 4 delta <= 1")
    N = phi.N
    d = math.ceil(11 * math.log(2 * N))
    xs = greedy_packing(N, d, symmetric=True).astype(np.float64)
    nu, T, R = _sat_arrays(phi, w)
    nus, Ts = [], []
    for m in range(N):
        for sign in (1.0, -1.0):
            a, b = _tensor_component(nu[m], T[m], qx_dist(sign * dbar * xs[m]))
            nus.append(a)
            Ts.append(b)
    meta = {
        "generator": "sat_separated",
        "n": phi.n,
        "clauses": [list(c) for c in phi.clauses],
        "w": w,
        "delta": delta,
        "delta_bar": dbar,
        "d": d,
    }
    return Lmdp(np.full(2 * N, 1.0 / (2 * N)), np.array(nus), np.array(Ts), lift_reward(R, 2 * d), meta)


def unsat_value_bound(phi, w, delta):
    """``1 - (1 - dbar^2)^((H-1)/2) / N``: ceiling on the separated model's value when unsatisfiable."""
    H = math.ceil(phi.n / w) + 1
    dbar = DELTA_BAR_FACTOR * delta
    return 1 - (1 - dbar**2) ** ((H - 1) / 2) / phi.N
