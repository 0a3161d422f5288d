"""Posterior over the latent index and maximum-likelihood decoding."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import component_probs, expand, markov_table, simulate, simulate_markov_batch
from .model import check_indices


def _split(prefix, actions=None):
    if actions is None:
        return tuple(prefix.states), tuple(prefix.actions)[: len(prefix.states) - 1]
    return tuple(prefix), tuple(actions)[: len(prefix) - 1]


def belief(model, prefix, actions=None):
    """Bayes posterior over latent indices given ``(s_1, a_1, ..., s_h)``.

    Accepts a :class:`Trajectory` or explicit ``states, actions`` sequences.
    """
    states, actions = _split(prefix, actions)
    check_indices(model, states, actions)
    w = component_probs(model, states, actions)
    total = w.sum()
    if total <= 0:
        raise ValueError("prefix has probability zero under every component")
    return w / total


@dataclass(frozen=True)
class DecodeResult:
    index: int
    scores: np.ndarray
    tie: bool


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def log_scores(model, states, actions):
    """``(n, L)`` scores ``log rho + log nu + sum log T`` for prefixes given as arrays."""
    states = np.atleast_2d(np.asarray(states, dtype=np.int64))
    actions = np.asarray(actions, dtype=np.int64).reshape(states.shape[0], -1)
    return _kernels.component_loglik(_log(model.rho), _log(model.nu), _log(model.T), states, actions)


def decode_scores(scores, support):
    """Row-wise argmax over ``support`` with lowest-index ties; returns ``(index, tie)``."""
    masked = np.full_like(scores, -np.inf)
    masked[:, support] = scores[:, support]
    idx = np.argmax(masked, axis=1)
    top = masked[np.arange(len(idx)), idx]
    n_top = (masked == top[:, None]).sum(axis=1)
    dead = np.isneginf(top)
    idx = np.where(dead, support[0], idx)
    return idx, (n_top > 1) | dead


def mle_decode(model, prefix, actions=None):
    states, actions = _split(prefix, actions)
    check_indices(model, states, actions)
    scores = log_scores(model, [states], [actions])
    idx, tie = decode_scores(scores, model.support)
    return DecodeResult(int(idx[0]), scores[0], bool(tie[0]))


def decoding_error_exact(model, policy, W, budget=None):
    """``P(decode(s_1, ..., s_W) != m*)`` under ``policy``, by exact enumeration."""
    if not 1 <= W <= model.H:
        raise ValueError("W must lie in 1..H")
    if len(model.support) == 1:
        return 0.0
    for layer in expand(model, policy, W, budget):
        pass
    idx, _ = decode_scores(log_scores(model, layer.states, layer.actions), model.support)
    w = layer.weights
    err = w.sum(axis=1) - w[np.arange(len(idx)), idx]
    return float(max(0.0, err.sum()))


def decoding_error_mc(model, policy, W, n_samples, seed):
    """Monte Carlo estimate of the decoding error with its standard error."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if not 1 <= W <= model.H:
        raise ValueError("W must lie in 1..H")
    if markov_table(policy, model) is not None:
        latent, states, actions = simulate_markov_batch(model, policy, n_samples, seed)
    else:
        seeds = np.random.SeedSequence(seed).spawn(n_samples)
        eps = [simulate(model, policy, np.random.default_rng(sd)) for sd in seeds]
        latent = np.array([e.latent for e in eps])
        states = np.array([e.states for e in eps])
        actions = np.array([e.actions for e in eps])
    idx, _ = decode_scores(log_scores(model, states[:, :W], actions[:, : W - 1]), model.support)
    miss = (idx != latent).astype(np.float64)
    p = miss.mean()
    return float(p), float(np.sqrt(p * (1 - p) / n_samples))
