"""Optimistic maximum-likelihood learning over a finite model class.

The optimism step maximizes ``V_theta(pi)`` over an explicit candidate set
per model (planner outputs by default) rather than over all policies. The
confidence set keeps every model whose log-likelihood is within ``beta`` of
the best one.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._config import BudgetExceeded
from .core import simulate, value
from .inference import decoding_error_exact, decoding_error_mc, log_scores
from .planner import plan
from .policies import Concat, Mixture, Uniform


class InfeasibleError(RuntimeError):
    """No (model, policy) pair in the confidence set meets the decoding-error ceiling."""


def explore_transform(pi, pi_exp, W, H):
    """Exploration mixture: half ``pi`` then ``pi_exp`` from step ``W``, half spread over uniform probes.

    Probe ``h`` (``h = 0..H-1``) follows ``pi`` for ``h`` steps, plays a
    uniform action at step ``h+1`` and then hands over to ``pi_exp``.
    """
    if not 1 <= W <= H:
        raise ValueError("W must lie in 1..H")
    uni = Uniform(pi.A)
    probes = [Concat(pi, h + 1, Concat(uni, 2, pi_exp)) for h in range(H)]
    weights = [0.5] + [1.0 / (2 * H)] * H
    return Mixture(weights, [Concat(pi, W, pi_exp)] + probes)


def _stack(trajs):
    states = np.array([t.states for t in trajs], dtype=np.int64)
    actions = np.array([t.actions for t in trajs], dtype=np.int64).reshape(len(trajs), -1)
    return states, actions[:, : states.shape[1] - 1]


def _logsumexp_rows(x):
    top = x.max(axis=1)
    safe = np.where(np.isneginf(top), 0.0, top)
    with np.errstate(divide="ignore"):
        return safe + np.log(np.exp(x - safe[:, None]).sum(axis=1))


def traj_logliks(model, trajs):
    """``log P_theta(tau)`` (model factors only) for each trajectory."""
    if len(trajs) == 0:
        return np.zeros(0)
    states, actions = _stack(trajs)
    return _logsumexp_rows(log_scores(model, states, actions))


def log_likelihood(model, dataset):
    """Sum of model log-probabilities over ``dataset``.

    Items are ``(policy, trajectory)`` pairs or bare trajectories; the policy
    factor is the same for every model and is left out.
    """
    trajs = [item[1] if isinstance(item, tuple) else item for item in dataset]
    return float(traj_logliks(model, trajs).sum())


class Environment:
    """Black box around a true model: the only operation is running one episode."""

    def __init__(self, model, seed=0):
        self._model = model
        self._seeds = np.random.SeedSequence(seed)
        self.episodes = 0

    @property
    def A(self):
        return self._model.A

    @property
    def H(self):
        return self._model.H

    def run_episode(self, policy):
        (child,) = self._seeds.spawn(1)
        self.episodes += 1
        return simulate(self._model, policy, np.random.default_rng(child))


@dataclass(frozen=True)
class OmleConfig:
    K: int
    W: int
    beta: float
    eps_s: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if not 0 < self.eps_s <= 1:
            raise ValueError("eps_s must lie in (0, 1]")
        if self.W < 1 or self.K < 1:
            raise ValueError("W and K must be positive")

    @staticmethod
    def default_beta(n_models, p=0.01):
        return 2 * math.log(n_models) + 2 * math.log(1 / p) + 2


@dataclass
class OmleTrace:
    records: list = field(default_factory=list)

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec) + "\n")

    def confidence_sets(self):
        return [rec["confidence_set"] for rec in self.records]


@dataclass
class CandidateTable:
    """Per-model candidate policies with their values and decoding errors."""

    policies: list
    values: list
    errors: list
    labels: list


def default_candidates(model, W):
    H = model.H
    windows = sorted({1, math.ceil(H / 2), H})
    return [plan(model, w) for w in windows], [f"plan(W={w})" for w in windows]


def _decoding_error(model, pi, W, seed):
    try:
        return decoding_error_exact(model, pi, W)
    except BudgetExceeded:
        est, se = decoding_error_mc(model, pi, W, 10_000, seed)
        return est + 2 * se


def build_candidates(theta_class, W, candidate_policies=None, seed=0):
    table = []
    for i, model in enumerate(theta_class):
        if candidate_policies is None:
            pols, labels = default_candidates(model, W)
        else:
            pols = list(candidate_policies(model))
            labels = [repr(p) for p in pols]
        if not pols:
            raise ValueError(f"no candidate policies for model {i}")
        vals = [value(model, p) for p in pols]
        errs = [_decoding_error(model, p, W, seed) for p in pols]
        table.append(CandidateTable(pols, vals, errs, labels))
    return table


def omle_run(theta_class, env, cfg, candidate_policies=None, pi_exp=None, candidates=None, on_iteration=None):
    """Run ``cfg.K`` OMLE iterations against ``env``.

    Returns ``(policy, trace)`` where ``policy`` is the uniform mixture of the
    per-iteration choices (repeated choices merged into one component).
    ``candidates`` may pass a precomputed :func:`build_candidates` table.
    """
    n = len(theta_class)
    if n == 0:
        raise ValueError("empty model class")
    H = theta_class[0].H
    if not 1 <= cfg.W <= H:
        raise ValueError("W must lie in 1..H")
    pi_exp = Uniform(theta_class[0].A) if pi_exp is None else pi_exp
    table = candidates if candidates is not None else build_candidates(theta_class, cfg.W, candidate_policies, cfg.seed)
    loglik = np.zeros(n)
    trace = OmleTrace()
    chosen = {}
    order = []
    for k in range(cfg.K):
        conf = np.flatnonzero(loglik >= loglik.max() - cfg.beta)
        best = None
        for i in conf:
            for j, (v, e) in enumerate(zip(table[i].values, table[i].errors)):
                if e <= cfg.eps_s and (best is None or v > best[0]):
                    best = (v, int(i), j)
        if best is None:
            raise InfeasibleError(f"iteration {k + 1}: no candidate has decoding error <= {cfg.eps_s}")
        v, i, j = best
        pi = table[i].policies[j]
        traj = env.run_episode(explore_transform(pi, pi_exp, cfg.W, H))
        for t in range(n):
            loglik[t] += traj_logliks(theta_class[t], [traj])[0]
        key = (i, j)
        if key not in chosen:
            chosen[key] = 0
            order.append(key)
        chosen[key] += 1
        rec = {
            "k": k + 1,
            "confidence_set": conf.tolist(),
            "model": i,
            "candidate": j,
            "candidate_label": table[i].labels[j],
            "optimistic_value": v,
            "explore_component": traj.component,
            "states": list(traj.states),
            "actions": list(traj.actions),
            "loglik": [float(x) for x in loglik],
        }
        trace.records.append(rec)
        if on_iteration is not None:
            on_iteration(rec)
    weights = np.array([chosen[key] for key in order], dtype=np.float64) / cfg.K
    policy = Mixture(weights, [table[i].policies[j] for i, j in order])
    return policy, trace


def config_dict(cfg):
    return asdict(cfg)
