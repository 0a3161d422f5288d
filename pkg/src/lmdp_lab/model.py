"""LMDP container and trajectories.

Array conventions used everywhere in the package (0-indexed):

* ``rho``  shape ``(L,)``        mixing weights
* ``nu``   shape ``(L, S)``      initial state distribution of each component
* ``T``    shape ``(L, S, A, S)``  ``T[m, s, a, s']``
* ``R``    shape ``(H, S, A)``   deterministic known reward, ``R[t, s, a]`` at step ``t+1``
"""

from dataclasses import dataclass, field

import numpy as np

PROB_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class Lmdp:
    rho: np.ndarray
    nu: np.ndarray
    T: np.ndarray
    R: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("rho", "nu", "T", "R"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        self.validate()

    @property
    def L(self):
        return self.rho.shape[0]

    @property
    def S(self):
        return self.T.shape[1]

    @property
    def A(self):
        return self.T.shape[2]

    @property
    def H(self):
        return self.R.shape[0]

    @property
    def support(self):
        """Component indices with positive mixing weight."""
        return np.flatnonzero(self.rho > 0)

    def validate(self):
        L = self.rho.shape[0]
        if self.rho.ndim != 1 or L == 0:
            raise ValueError("rho must be a non-empty vector")
        if self.T.ndim != 4 or self.T.shape[0] != L or self.T.shape[1] != self.T.shape[3]:
            raise ValueError(f"T must have shape (L, S, A, S); got {self.T.shape}")
        S, A = self.T.shape[1], self.T.shape[2]
        if self.nu.shape != (L, S):
            raise ValueError(f"nu must have shape {(L, S)}; got {self.nu.shape}")
        if self.R.ndim != 3 or self.R.shape[1:] != (S, A) or self.R.shape[0] < 1:
            raise ValueError(f"R must have shape (H, {S}, {A}); got {self.R.shape}")
        for name, arr, axis in (("rho", self.rho, 0), ("nu", self.nu, 1), ("T", self.T, 3)):
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has negative or non-finite entries")
            if np.any(np.abs(arr.sum(axis=axis) - 1.0) > PROB_ATOL):
                raise ValueError(f"{name} rows do not sum to 1")
        if np.any(self.R < 0) or np.any(self.R > 1):
            raise ValueError("rewards must lie in [0, 1]")
        total = self.R.reshape(self.H, -1).max(axis=1).sum()
        if total > 1 + PROB_ATOL:
            raise ValueError(f"sum_h max R_h = {total:.6g} exceeds 1")

    def component(self, m):
        """Single-component LMDP wrapping component ``m``."""
        return Lmdp(np.ones(1), self.nu[m : m + 1], self.T[m : m + 1], self.R, dict(self.metadata))

    def with_rho(self, rho):
        return Lmdp(rho, self.nu, self.T, self.R, dict(self.metadata))

    def initial_state_dist(self):
        return self.rho @ self.nu

    def same_arrays(self, other):
        return all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in ("rho", "nu", "T", "R")
        )


@dataclass(frozen=True)
class Trajectory:
    """``states[t]`` and ``actions[t]`` for t = 0..len-1; ``latent`` only for simulated episodes."""

    states: tuple
    actions: tuple
    latent: int | None = None
    component: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(int(s) for s in self.states))
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        if len(self.actions) not in (len(self.states), len(self.states) - 1):
            raise ValueError("a trajectory has as many actions as states, or one fewer (a prefix)")

    def __len__(self):
        return len(self.states)

    def prefix(self, n_states):
        """The prefix ``(s_1, a_1, ..., s_n)`` without the final action."""
        return Trajectory(self.states[:n_states], self.actions[: n_states - 1], self.latent)


def check_indices(model, states, actions):
    if any(not 0 <= s < model.S for s in states):
        raise IndexError("state index out of range")
    if any(not 0 <= a < model.A for a in actions):
        raise IndexError("action index out of range")
    if len(states) > model.H:
        raise IndexError("trajectory longer than the horizon")


def encode_prefix(states, actions, S, A):
    """Mixed-radix code of ``(s_1, a_1, ..., s_h)``; vectorized over leading axes."""
    states = np.asarray(states, dtype=np.int64)
    actions = np.asarray(actions, dtype=np.int64)
    code = states[..., 0].copy()
    for t in range(1, states.shape[-1]):
        code = (code * A + actions[..., t - 1]) * S + states[..., t]
    return code


def decode_prefix(code, n_states, S, A):
    """Inverse of :func:`encode_prefix` for a single code."""
    states, actions = [], []
    code = int(code)
    for _ in range(n_states - 1):
        code, s = divmod(code, S)
        code, a = divmod(code, A)
        states.append(s)
        actions.append(a)
    states.append(code)
    return tuple(reversed(states)), tuple(reversed(actions))
