"""Exact trajectory semantics: probabilities, distributions, values, simulation.

Exact quantities come from a layered forward expansion of the history tree.
Layer ``t`` holds every prefix ``(s_1, a_1, ..., s_{t+1})`` of positive
probability together with its joint weight with each latent index,
``w[m] = rho(m) nu_m(s_1) prod T_m(s_{u+1}|s_u, a_u) prod pi(a_u|...)``.
Zero-probability branches are pruned as soon as they appear, so the cost
tracks the reachable tree rather than the full ``(SA)^t S`` grid.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._config import check_budget
from .model import Trajectory, check_indices, encode_prefix
from .policies import Markov, Mixture, OpenLoop, Policy, Uniform


@dataclass(frozen=True)
class Layer:
    t: int
    states: np.ndarray  # (n, t+1)
    actions: np.ndarray  # (n, t)
    weights: np.ndarray  # (n, L) joint with the latent index
    probs: np.ndarray  # (n, A) policy at this prefix


def expand(model, policy, n_layers, budget=None, with_policy=True):
    """Yield :class:`Layer` objects for ``t = 0 .. n_layers-1``.

    With ``with_policy=False`` the policy factor is left out of the weights
    (every action branch is kept) and ``probs`` is all ones.
    """
    if n_layers > model.H:
        raise ValueError(f"cannot expand {n_layers} layers with horizon {model.H}")
    joint0 = model.rho[:, None] * model.nu  # (L, S)
    s0 = np.flatnonzero(joint0.sum(axis=0) > 0)
    states = s0[:, None].astype(np.int64)
    actions = np.zeros((len(s0), 0), dtype=np.int64)
    W = joint0[:, s0].T.copy()
    check_budget(len(s0), budget)
    A = model.A
    for t in range(n_layers):
        if with_policy:
            P = np.asarray(policy.probs(t, states, actions), dtype=np.float64)
        else:
            P = np.ones((states.shape[0], A))
        yield Layer(t, states, actions, W, P)
        if t + 1 == n_layers:
            return
        # (L, n, A, S) -> (n, A, S, L)
        Tn = np.moveaxis(model.T[:, states[:, t]], 0, -1)
        Wn = W[:, None, None, :] * P[:, :, None, None] * Tn
        i, a, s = np.nonzero(Wn.sum(axis=-1) > 0)
        check_budget(len(i), budget, what=f"history layer {t + 2}")
        states = np.concatenate([states[i], s[:, None]], axis=1)
        actions = np.concatenate([actions[i], a[:, None]], axis=1)
        W = Wn[i, a, s]


@dataclass(frozen=True)
class TrajDist:
    """Exact distribution over full-length trajectories ``(s_1, a_1, ..., s_h, a_h)``.

    ``joint[i, m]`` is the probability of row ``i`` together with latent ``m``.
    """

    states: np.ndarray
    actions: np.ndarray
    joint: np.ndarray

    @property
    def probs(self):
        return self.joint.sum(axis=1)

    def __len__(self):
        return self.states.shape[0]

    def as_dict(self):
        p = self.probs
        return {
            (tuple(self.states[i].tolist()), tuple(self.actions[i].tolist())): float(p[i])
            for i in range(len(self))
        }

    def prob(self, states, actions):
        return self.as_dict().get((tuple(states), tuple(actions)), 0.0)

    def state_marginal(self):
        """Probability of each distinct state sequence, summed over actions."""
        out = {}
        for s, p in zip(map(tuple, self.states.tolist()), self.probs):
            out[s] = out.get(s, 0.0) + float(p)
        return out


def traj_dist(model, policy, upto=None, budget=None):
    """Exact distribution over length-``upto`` trajectories (default ``H``)."""
    upto = model.H if upto is None else int(upto)
    if not 1 <= upto <= model.H:
        raise ValueError("upto must lie in 1..H")
    for layer in expand(model, policy, upto, budget):
        pass
    i, a = np.nonzero(layer.probs > 0)
    check_budget(len(i), budget, what="trajectory leaves")
    states = layer.states[i]
    actions = np.concatenate([layer.actions[i], a[:, None]], axis=1)
    joint = layer.weights[i] * layer.probs[i, a][:, None]
    return TrajDist(states, actions, joint)


def model_prob(model, states, actions):
    """``sum_m rho(m) nu_m(s_1) prod T_m(s_{t+1}|s_t, a_t)`` for one sequence."""
    return float(component_probs(model, states, actions).sum())


def component_probs(model, states, actions):
    """Per-component joint ``rho(m) nu_m(s_1) prod T_m(...)``, shape ``(L,)``."""
    w = model.rho * model.nu[:, states[0]]
    for t in range(len(states) - 1):
        w = w * model.T[:, states[t], actions[t], states[t + 1]]
    return w


def traj_prob(model, policy, traj):
    """Probability of a full trajectory or prefix under ``policy``, zero when unreachable."""
    states, actions = traj.states, traj.actions
    check_indices(model, states, actions)
    p = model_prob(model, states, actions)
    if p == 0.0:
        return 0.0
    st = np.asarray(states, dtype=np.int64)[None, :]
    ac = np.asarray(actions, dtype=np.int64)[None, :]
    for t in range(len(actions)):
        p *= float(policy.probs(t, st[:, : t + 1], ac[:, :t])[0, actions[t]])
        if p == 0.0:
            return 0.0
    return p


def simulate(model, policy, seed):
    """Sample one episode; the result carries the latent index and mixture component."""
    rng = np.random.default_rng(seed)
    comp, pol = policy.resolve(rng)
    m = int(rng.choice(model.L, p=model.rho))
    s = int(rng.choice(model.S, p=model.nu[m]))
    states, actions = [s], []
    for t in range(model.H):
        p = pol.act_probs(states, actions)
        a = int(rng.choice(model.A, p=p / p.sum()))
        actions.append(a)
        if t + 1 < model.H:
            s = int(rng.choice(model.S, p=model.T[m, s, a]))
            states.append(s)
    return Trajectory(states, actions, latent=m, component=comp)


def simulate_markov_batch(model, policy, n, seed):
    """Fast batch sampler for Markov (or uniform / open-loop) policies.

    Returns ``(latent, states, actions)`` arrays with ``n`` rows.
    """
    table = markov_table(policy, model)
    if table is None:
        raise TypeError("batch sampling needs a Markov, Uniform or OpenLoop policy")
    rng = np.random.default_rng(seed)
    u = rng.random((n, 2 * model.H + 1))
    return _kernels.sample_markov(model.rho, model.nu, model.T, table, u)


def markov_table(policy, model):
    """``(H, S, A)`` table for policies that only look at the current state, else None."""
    H, S, A = model.H, model.S, model.A
    if isinstance(policy, Markov):
        if policy.table.shape != (H, S, A):
            raise ValueError(f"Markov table shape {policy.table.shape} does not match {(H, S, A)}")
        return policy.table
    if isinstance(policy, Uniform):
        return np.full((H, S, A), 1.0 / A)
    if isinstance(policy, OpenLoop):
        table = np.zeros((H, S, A))
        for t in range(H):
            table[t, :, policy.actions[t]] = 1.0
        return table
    return None


def _markov_value(model, table):
    total = 0.0
    for m in model.support:
        d = model.nu[m]
        v = 0.0
        for t in range(model.H):
            da = d[:, None] * table[t]  # (S, A)
            v += float((da * model.R[t]).sum())
            if t + 1 < model.H:
                d = np.einsum("sa,sat->t", da, model.T[m])
        total += model.rho[m] * v
    return total


def value(model, policy, budget=None, method="auto"):
    """Exact expected return ``E[sum_h R_h(s_h, a_h)]``.

    ``method="auto"`` uses a per-component forward recursion for Markov-type
    policies, linearity for mixtures, and tree enumeration otherwise.
    ``method="tree"`` forces enumeration.
    """
    if method == "auto":
        table = markov_table(policy, model)
        if table is not None:
            return _markov_value(model, table)
        if isinstance(policy, Mixture):
            return float(
                sum(w * value(model, p, budget) for w, p in zip(policy.weights, policy.policies) if w > 0)
            )
    elif method != "tree":
        raise ValueError(f"unknown method {method!r}")
    total = 0.0
    for layer in expand(model, policy, model.H, budget):
        s = layer.states[:, -1]
        mass = layer.weights.sum(axis=1)
        total += float((mass[:, None] * layer.probs * model.R[layer.t, s]).sum())
    return total


def mdp_value_iteration(model, m, h0=1):
    """Finite-horizon backward DP on component ``m`` for steps ``h0..H`` (1-indexed).

    Returns ``(V, Q, policy)`` with ``V`` of shape ``(H+1, S)`` (row ``H`` is
    zero), ``Q`` of shape ``(H, S, A)``; rows before ``h0-1`` stay zero. The
    greedy policy breaks ties toward the lowest action index and plays action
    0 before ``h0``.
    """
    H, S, A = model.H, model.S, model.A
    if not 1 <= h0 <= H:
        raise ValueError("h0 must lie in 1..H")
    V = np.zeros((H + 1, S))
    Q = np.zeros((H, S, A))
    act = np.zeros((H, S), dtype=np.int64)
    Tm = model.T[m]
    for t in range(H - 1, h0 - 2, -1):
        Q[t] = model.R[t] + Tm @ V[t + 1]
        act[t] = np.argmax(Q[t], axis=1)
        V[t] = Q[t].max(axis=1)
    return V, Q, Markov.deterministic(act, A)


# -- brute-force optimal planning ---------------------------------------------


def full_weights(model, n_states, budget=None):
    """Component weights on the complete mixed-radix tree.

    Returns a list whose entry ``t`` has shape ``((SA)^t S, L)`` and holds
    ``rho(m) nu_m(s_1) prod T_m`` for every prefix with ``t+1`` states.
    """
    S, A, L = model.S, model.A, model.L
    check_budget((S * A) ** (n_states - 1) * S, budget, what="history tree")
    w = (model.rho[:, None] * model.nu).T  # (S, L)
    out = [w]
    for t in range(n_states - 1):
        s = np.arange(w.shape[0]) % S
        # child code = code * A * S + a * S + s'
        Tn = np.moveaxis(model.T[:, s], 0, -1)  # (n, A, S, L)
        w = (w[:, None, None, :] * Tn).reshape(-1, L)
        out.append(w)
    return out


def leaf_count(model, H=None):
    H = model.H if H is None else H
    return (model.S * model.A) ** H


def brute_force_optimal(model, budget=None, method="auto"):
    """Exact optimum over history-dependent policies.

    ``method="tree"`` runs backward DP over the full mixed-radix history tree
    and returns a deterministic :class:`HistoryTree`. ``method="belief"`` runs
    the same recursion on reachable ``(step, state, posterior)`` nodes, merging
    histories with equal posteriors, and returns a :class:`BeliefPolicy`.
    ``"auto"`` picks the tree when ``(SA)^H`` fits the budget.
    """
    from ._config import enumeration_budget

    if method == "auto":
        method = "tree" if leaf_count(model) <= enumeration_budget(budget) else "belief"
    if method == "tree":
        return _brute_force_tree(model, budget)
    if method == "belief":
        return _brute_force_belief(model, budget)
    raise ValueError(f"unknown method {method!r}")


def _brute_force_tree(model, budget=None):
    from .policies import HistoryTree

    check_budget(leaf_count(model), budget, what="history tree leaves")
    S, A, H = model.S, model.A, model.H
    ws = full_weights(model, H, budget)
    acts = [None] * H
    U = None
    for t in range(H - 1, -1, -1):
        mass = ws[t].sum(axis=1)
        s = np.arange(mass.shape[0]) % S
        Q = model.R[t, s] * mass[:, None]
        if U is not None:
            Q = Q + U.reshape(-1, A, S).sum(axis=2)
        acts[t] = np.argmax(Q, axis=1)
        U = Q.max(axis=1)
    return float(U.sum()), HistoryTree(S, A, acts)


def _belief_key(s, b, decimals=12):
    return (int(s),) + tuple(np.round(b, decimals).tolist())


class BeliefPolicy(Policy):
    """Deterministic policy acting on ``(step, state, posterior)``.

    ``tables[t]`` maps a rounded ``(state, posterior)`` key to an action for
    ``t < H-1``; at the last step the action depends on the state only and
    comes from ``last``. Histories the tables never saw (zero probability
    under the model) get action 0.
    """

    def __init__(self, model, tables, last, decimals=12):
        self.model = model
        self.tables = tables
        self.last = np.asarray(last, dtype=np.int64)
        self.decimals = decimals
        self.A = model.A

    def probs(self, t, states, actions):
        n = states.shape[0]
        out = np.zeros((n, self.A))
        if t == self.model.H - 1:
            out[np.arange(n), self.last[states[:, t]]] = 1.0
            return out
        for i in range(n):
            b = self._belief(states[i], actions[i])
            a = 0 if b is None else self.tables[t].get(_belief_key(states[i, t], b, self.decimals), 0)
            out[i, a] = 1.0
        return out

    def _belief(self, states, actions):
        # same update order as the forward pass so that keys match bit for bit
        m = self.model
        p0 = m.rho * m.nu[:, states[0]]
        if p0.sum() <= 0:
            return None
        b = p0 / p0.sum()
        for t in range(len(states) - 1):
            un = b * m.T[:, states[t], actions[t], states[t + 1]]
            p = un.sum()
            if p <= 0:
                return None
            b = un / p
        return b

    def __repr__(self):
        return f"BeliefPolicy(H={self.model.H})"


def _belief_children(model, st, bel, decimals, chunk):
    """Successor beliefs of every node, merged on rounded ``(state, posterior)``."""
    n, A, S, L = len(st), model.A, model.S, model.L
    cprob = np.zeros((n, A, S))
    parts = []
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        Tn = np.moveaxis(model.T[:, st[lo:hi]], 0, -1)  # (c, A, S, L)
        un = bel[lo:hi, None, None, :] * Tn
        p = un.sum(axis=-1)
        cprob[lo:hi] = p
        i, a, s = np.nonzero(p > 0)
        b = un[i, a, s] / p[i, a, s][:, None]
        parts.append((i + lo, a, s, b))
    i = np.concatenate([q[0] for q in parts])
    a = np.concatenate([q[1] for q in parts])
    s = np.concatenate([q[2] for q in parts])
    b = np.concatenate([q[3] for q in parts]).reshape(-1, L)
    keys = np.column_stack([s.astype(np.float64), np.round(b, decimals)])
    _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    child = np.full((n, A, S), -1, dtype=np.int64)
    child[i, a, s] = inv.reshape(-1)
    return cprob, child, s[first].astype(np.int64), b[first]


def _brute_force_belief(model, budget=None, decimals=12, chunk=512):
    S, A, H = model.S, model.A, model.H
    joint0 = model.rho[:, None] * model.nu
    p0 = joint0.sum(axis=0)
    s0 = np.flatnonzero(p0 > 0)
    st = s0.astype(np.int64)
    bel = (joint0[:, s0] / p0[s0]).T
    start_mass = p0[s0]
    # the last step's value depends on the state alone, so that layer is never built
    last_q = model.R[H - 1]
    last_v = last_q.max(axis=1)
    last_act = np.argmax(last_q, axis=1)
    layers = []
    for t in range(H - 1):
        check_budget(len(st), budget, what=f"belief layer {t + 1}")
        if t == H - 2:
            cprob = np.einsum("nl,lnat->nat", bel, model.T[:, st])
            layers.append((st, bel, None, cprob))
            break
        cprob, child, st_next, bel_next = _belief_children(model, st, bel, decimals, chunk)
        layers.append((st, bel, child, cprob))
        st, bel = st_next, bel_next
    tables = [None] * (H - 1)
    if H == 1:
        return float(start_mass @ last_v[st]), BeliefPolicy(model, tables, last_act, decimals)
    V = None
    for t in range(H - 2, -1, -1):
        st, bel, child, cprob = layers[t]
        if child is None:
            cont = cprob @ last_v
        else:
            cont = (cprob * np.where(child >= 0, V[np.maximum(child, 0)], 0.0)).sum(axis=2)
        Q = model.R[t, st] + cont
        act = np.argmax(Q, axis=1)
        V = Q.max(axis=1)
        keys = np.round(bel, decimals)
        tables[t] = {(int(st[k]),) + tuple(keys[k].tolist()): int(act[k]) for k in range(len(st))}
    return float(start_mass @ V), BeliefPolicy(model, tables, last_act, decimals)


def prefix_codes(layer, S, A):
    return encode_prefix(layer.states, layer.actions, S, A)
