from itertools import product

import numpy as np
import pytest

from lmdp_lab import (
    BudgetExceeded,
    HistoryTree,
    Markov,
    Trajectory,
    Uniform,
    brute_force_optimal,
    mdp_value_iteration,
    simulate,
    traj_dist,
    traj_prob,
    value,
)
from lmdp_lab.core import simulate_markov_batch
from lmdp_lab.generators import random_lmdp

from conftest import random_models


def _enumerated_value(model, policy):
    """Value by summing over every full trajectory and latent index, one at a time."""
    S, A, H = model.S, model.A, model.H
    total = 0.0
    for seq in product(range(S), range(A), repeat=H):
        states, actions = seq[0::2], seq[1::2]
        p = traj_prob(model, policy, Trajectory(states, actions))
        total += p * sum(model.R[t, states[t], actions[t]] for t in range(H))
    return total


def test_value_matches_naive_enumeration(rng):
    model = random_lmdp(2, 2, 2, 3, rng)
    pol = HistoryTree.random(2, 2, 3, rng)
    assert value(model, pol) == pytest.approx(_enumerated_value(model, pol), abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_markov_fast_path_matches_tree(seed):
    rng = np.random.default_rng(seed)
    model = random_lmdp(3, 3, 2, 4, rng)
    pol = Markov.random(4, 3, 2, rng)
    assert value(model, pol) == pytest.approx(value(model, pol, method="tree"), abs=1e-12)
    assert value(model, Uniform(2)) == pytest.approx(value(model, Uniform(2), method="tree"), abs=1e-12)


def test_traj_dist_sums_to_one(small_model, rng):
    pol = HistoryTree.random(3, 2, 3, rng)
    for upto in (1, 2, 3):
        d = traj_dist(small_model, pol, upto)
        assert d.probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert (d.probs > 0).all()


def test_traj_prob_agrees_with_traj_dist(small_model, rng):
    pol = HistoryTree.random(3, 2, 3, rng)
    d = traj_dist(small_model, pol)
    for i in range(0, len(d), 7):
        tr = Trajectory(d.states[i], d.actions[i])
        assert traj_prob(small_model, pol, tr) == pytest.approx(d.probs[i], abs=1e-14)


def test_single_component_value_iteration_is_optimal(rng):
    model = random_lmdp(1, 3, 2, 4, rng)
    V, Q, pol = mdp_value_iteration(model, 0)
    assert float(model.nu[0] @ V[0]) == pytest.approx(brute_force_optimal(model)[0], abs=1e-12)
    assert value(model, pol) == pytest.approx(float(model.nu[0] @ V[0]), abs=1e-12)


def test_brute_force_routes_agree():
    for model in random_models(15, seed=3):
        tree_v, tree_pol = brute_force_optimal(model, method="tree")
        bel_v, bel_pol = brute_force_optimal(model, method="belief")
        assert tree_v == pytest.approx(bel_v, abs=1e-12)
        assert value(model, tree_pol) == pytest.approx(tree_v, abs=1e-12)
        assert value(model, bel_pol) == pytest.approx(bel_v, abs=1e-12)


def test_brute_force_dominates_random_policies(rng):
    model = random_lmdp(2, 2, 2, 3, rng)
    opt, _ = brute_force_optimal(model)
    for _ in range(20):
        assert value(model, HistoryTree.random(2, 2, 3, rng)) <= opt + 1e-12


def test_budget_is_enforced(small_model):
    with pytest.raises(BudgetExceeded):
        brute_force_optimal(small_model, budget=5, method="tree")
    with pytest.raises(BudgetExceeded):
        traj_dist(small_model, Uniform(2), budget=5)


def test_budget_env_override(small_model, monkeypatch):
    monkeypatch.setenv("LMDP_LAB_BUDGET", "5")
    with pytest.raises(BudgetExceeded):
        brute_force_optimal(small_model, method="tree")


def test_simulate_is_reproducible(small_model):
    a = simulate(small_model, Uniform(2), 7)
    b = simulate(small_model, Uniform(2), 7)
    assert a == b
    assert len(a.states) == small_model.H == len(a.actions)


def test_batch_sampler_frequencies(small_model):
    n = 40_000
    _, states, actions = simulate_markov_batch(small_model, Uniform(2), n, 0)
    d = traj_dist(small_model, Uniform(2)).as_dict()
    keys, counts = np.unique(np.concatenate([states, actions], axis=1), axis=0, return_counts=True)
    H = small_model.H
    worst = 0.0
    for row, c in zip(keys, counts):
        p = d[(tuple(row[:H]), tuple(row[H:]))]
        worst = max(worst, abs(c / n - p) / np.sqrt(p * (1 - p) / n))
    assert worst < 5
