import numpy as np
import pytest

from lmdp_lab import Concat, HistoryTree, Markov, Mixture, OpenLoop, Uniform, traj_dist, value
from lmdp_lab.generators import random_lmdp


def _rows(policy, t, states, actions):
    return policy.probs(t, np.array([states]), np.array([actions]).reshape(1, -1))[0]


def test_uniform_and_openloop():
    np.testing.assert_allclose(_rows(Uniform(3), 0, [0], []), [1 / 3] * 3)
    ol = OpenLoop([1, 0, 1], 2)
    np.testing.assert_array_equal(_rows(ol, 1, [0, 1], [1]), [1, 0])


def test_markov_random_is_normalized(rng):
    pol = Markov.random(3, 4, 2, rng)
    np.testing.assert_allclose(pol.table.sum(-1), 1.0)
    assert Markov.random(3, 4, 2, rng, deterministic=True).is_deterministic


def test_history_tree_layer_sizes():
    with pytest.raises(ValueError):
        HistoryTree(2, 2, [np.zeros(3, dtype=int)])


def test_mixture_value_is_linear(rng):
    model = random_lmdp(2, 3, 2, 3, rng)
    p1 = HistoryTree.random(3, 2, 3, rng)
    p2 = Markov.random(3, 3, 2, rng)
    mix = Mixture([0.3, 0.7], [p1, p2])
    assert value(model, mix, method="tree") == pytest.approx(0.3 * value(model, p1) + 0.7 * value(model, p2), abs=1e-12)


def test_mixture_trajectory_distribution_is_linear(rng):
    model = random_lmdp(2, 2, 2, 3, rng)
    p1, p2 = HistoryTree.random(2, 2, 3, rng), HistoryTree.random(2, 2, 3, rng)
    mix = traj_dist(model, Mixture([0.5, 0.5], [p1, p2])).as_dict()
    d1, d2 = traj_dist(model, p1).as_dict(), traj_dist(model, p2).as_dict()
    for k in set(d1) | set(d2):
        assert mix.get(k, 0.0) == pytest.approx(0.5 * d1.get(k, 0.0) + 0.5 * d2.get(k, 0.0), abs=1e-12)


def test_mixture_rejects_bad_weights():
    with pytest.raises(ValueError):
        Mixture([0.5, 0.6], [Uniform(2), Uniform(2)])


def test_concat_reindexes_tail():
    tail = OpenLoop([1, 0], 2)
    pol = Concat(OpenLoop([0, 0, 0], 2), 2, tail)
    assert _rows(pol, 0, [0], []).tolist() == [1, 0]
    # step 2 is the tail's first step
    assert _rows(pol, 1, [0, 0], [0]).tolist() == [0, 1]
    assert _rows(pol, 2, [0, 0, 0], [0, 1]).tolist() == [1, 0]
