"""Policies as a small closed family of classes.

Every policy answers one vectorized query::

    policy.probs(t, states, actions) -> (n, A) array

where ``t`` is the 0-indexed step, ``states`` has shape ``(n, t+1)`` and
``actions`` has shape ``(n, t)``: row ``i`` is the history prefix
``(s_1, a_1, ..., s_{t+1})`` and the result is the action distribution at that
prefix. Mixtures are randomized once per episode, so their per-step
conditional is the posterior-weighted mix of the components.
"""

import numpy as np

from .model import encode_prefix


class Policy:
    A: int

    def probs(self, t, states, actions):
        raise NotImplementedError

    def act_probs(self, states, actions):
        """Action distribution after a single prefix given as sequences."""
        states = np.asarray(states, dtype=np.int64)[None, :]
        actions = np.asarray(actions, dtype=np.int64).reshape(1, -1)
        return self.probs(states.shape[1] - 1, states, actions)[0]

    def resolve(self, rng):
        """Draw the per-episode randomization; returns ``(component index, policy)``."""
        return None, self


class Uniform(Policy):
    def __init__(self, A):
        self.A = int(A)

    def probs(self, t, states, actions):
        return np.full((states.shape[0], self.A), 1.0 / self.A)

    def __repr__(self):
        return f"Uniform({self.A})"


class OpenLoop(Policy):
    """Plays a fixed action sequence regardless of the states observed."""

    def __init__(self, actions, A):
        self.actions = tuple(int(a) for a in actions)
        self.A = int(A)
        if any(not 0 <= a < self.A for a in self.actions):
            raise ValueError("open-loop action out of range")

    def probs(self, t, states, actions):
        if t >= len(self.actions):
            raise IndexError(f"open-loop policy has no action for step {t + 1}")
        out = np.zeros((states.shape[0], self.A))
        out[:, self.actions[t]] = 1.0
        return out

    def __repr__(self):
        return f"OpenLoop({list(self.actions)})"


class Markov(Policy):
    """Time-dependent Markov policy ``table[t, s] -> Dist(A)``."""

    def __init__(self, table):
        table = np.array(table, dtype=np.float64)
        if table.ndim != 3:
            raise ValueError("Markov table must have shape (H, S, A)")
        if np.any(table < 0) or np.any(np.abs(table.sum(-1) - 1) > 1e-12):
            raise ValueError("Markov table rows must be distributions")
        table.setflags(write=False)
        self.table = table
        self.A = table.shape[2]

    @classmethod
    def deterministic(cls, actions, A):
        actions = np.asarray(actions, dtype=np.int64)
        table = np.zeros(actions.shape + (A,))
        np.put_along_axis(table, actions[..., None], 1.0, axis=-1)
        return cls(table)

    @classmethod
    def random(cls, H, S, A, rng, deterministic=False):
        if deterministic:
            return cls.deterministic(rng.integers(A, size=(H, S)), A)
        return cls(rng.dirichlet(np.ones(A), size=(H, S)))

    @property
    def is_deterministic(self):
        return bool(np.all((self.table == 0) | (self.table == 1)))

    def probs(self, t, states, actions):
        return self.table[t, states[:, t]]

    def __repr__(self):
        return f"Markov(H={self.table.shape[0]}, S={self.table.shape[1]}, A={self.A})"


class HistoryTree(Policy):
    """General history-dependent policy stored layer by layer.

    ``layers[t]`` is indexed by the mixed-radix code of the prefix
    ``(s_1, a_1, ..., s_{t+1})`` and holds either an ``(n_t, A)`` probability
    array or an ``(n_t,)`` integer array of deterministic actions.
    """

    def __init__(self, S, A, layers):
        self.S, self.A = int(S), int(A)
        self.layers = []
        for t, layer in enumerate(layers):
            layer = np.asarray(layer)
            expected = (self.S * self.A) ** t * self.S
            if layer.shape[0] != expected:
                raise ValueError(f"layer {t} has {layer.shape[0]} rows, expected {expected}")
            layer.setflags(write=False)
            self.layers.append(layer)

    @classmethod
    def random(cls, S, A, H, rng, deterministic=False):
        layers = []
        for t in range(H):
            n = (S * A) ** t * S
            if deterministic:
                layers.append(rng.integers(A, size=n))
            else:
                layers.append(rng.dirichlet(np.ones(A), size=n))
        return cls(S, A, layers)

    @classmethod
    def from_function(cls, S, A, H, fn):
        """Materialize ``fn(states, actions) -> Dist(A)`` over every prefix."""
        from .model import decode_prefix

        layers = []
        for t in range(H):
            n = (S * A) ** t * S
            layer = np.empty((n, A))
            for code in range(n):
                st, ac = decode_prefix(code, t + 1, S, A)
                layer[code] = fn(st, ac)
            layers.append(layer)
        return cls(S, A, layers)

    @property
    def horizon(self):
        return len(self.layers)

    def probs(self, t, states, actions):
        codes = encode_prefix(states, actions, self.S, self.A)
        layer = self.layers[t]
        if layer.ndim == 1:
            out = np.zeros((codes.shape[0], self.A))
            out[np.arange(codes.shape[0]), layer[codes]] = 1.0
            return out
        return layer[codes]

    def __repr__(self):
        return f"HistoryTree(S={self.S}, A={self.A}, H={self.horizon})"


class Mixture(Policy):
    """Draw one component policy per episode with the given weights."""

    def __init__(self, weights, policies):
        weights = np.asarray(weights, dtype=np.float64)
        if len(weights) != len(policies) or len(policies) == 0:
            raise ValueError("need one weight per component policy")
        if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
            raise ValueError("mixture weights must form a distribution")
        A = {p.A for p in policies}
        if len(A) != 1:
            raise ValueError("component policies disagree on the number of actions")
        self.weights = weights
        self.policies = list(policies)
        self.A = A.pop()

    def resolve(self, rng):
        i = int(rng.choice(len(self.policies), p=self.weights))
        _, inner = self.policies[i].resolve(rng)
        return i, inner

    def probs(self, t, states, actions):
        n = states.shape[0]
        num = np.zeros((n, self.A))
        den = np.zeros(n)
        for w, pol in zip(self.weights, self.policies):
            if w == 0:
                continue
            lik = np.full(n, w)
            for u in range(t):
                p = pol.probs(u, states[:, : u + 1], actions[:, :u])
                lik = lik * p[np.arange(n), actions[:, u]]
            num += lik[:, None] * pol.probs(t, states, actions)
            den += lik
        out = np.full((n, self.A), 1.0 / self.A)
        ok = den > 0
        out[ok] = num[ok] / den[ok, None]
        return out

    def __repr__(self):
        return f"Mixture({len(self.policies)} components)"


class Concat(Policy):
    """Run ``head`` before step ``switch`` (1-indexed), then ``tail`` on the fresh suffix.

    The tail never sees the pre-switch history: it is queried as if the
    episode started at step ``switch``.
    """

    def __init__(self, head, switch, tail):
        if head.A != tail.A:
            raise ValueError("head and tail disagree on the number of actions")
        if switch < 1:
            raise ValueError("switch step is 1-indexed")
        self.head, self.switch, self.tail = head, int(switch), tail
        self.A = head.A

    def resolve(self, rng):
        # per-episode randomness of either part is drawn lazily through probs()
        return None, self

    def probs(self, t, states, actions):
        k = self.switch - 1
        if t < k:
            return self.head.probs(t, states, actions)
        return self.tail.probs(t - k, states[:, k:], actions[:, k:])

    def __repr__(self):
        return f"Concat({self.head!r}, {self.switch}, {self.tail!r})"
