import math
from itertools import product

import numpy as np
import pytest

from lmdp_lab import HistoryTree, OpenLoop, brute_force_optimal, traj_dist, value
from lmdp_lab.divergences import tv
from lmdp_lab.generators import (
    SatFormula,
    augment_lmdp,
    augment_mdp,
    comb_lock,
    comb_lock_decodable,
    greedy_packing,
    lock_sequences,
    lock_weight,
    make_family,
    moment_matching,
    optimistic_pair,
    preset_exact,
    preset_tradeoff,
    qx_dist,
    random_separated,
    sat_to_lmdp,
    sat_to_separated_lmdp,
    tensor_family,
    unsat_value_bound,
)
from lmdp_lab.generators.families import moment_gap, unif_moments_bound
from lmdp_lab.model import decode_prefix
from lmdp_lab.separation import is_n_step_decodable, min_pairwise_tv

# -- locks ---------------------------------------------------------------------


def test_lock_sequences_cover_reachable_paths():
    model = comb_lock(3, 2, 4, "01")
    seqs = set(lock_sequences(3, 4).values())
    for a in product(range(2), repeat=4):
        for s in traj_dist(model, OpenLoop(a, 2)).state_marginal():
            assert s in seqs


def test_reference_lock_profile():
    n, H = 3, 4
    model = comb_lock(n, 2, H, "reference")
    seqs = lock_sequences(n, H)
    marg = traj_dist(model, OpenLoop([1, 0, 1, 1], 2)).state_marginal()
    for h in range(1, n + 1):
        assert marg[seqs[h]] == pytest.approx(1 / n, abs=1e-12)


def test_lock_rejects_bad_codes():
    with pytest.raises(ValueError):
        comb_lock(3, 2, 4, "0")
    with pytest.raises(ValueError):
        comb_lock(3, 2, 4, "02")
    with pytest.raises(ValueError):
        comb_lock(3, 2, 3, "01")


def test_lock_weights_sum_to_one(rng):
    n, A = 3, 2
    pol = HistoryTree.random(n + 1, A, n + 1, rng)
    total = sum(lock_weight(pol, code, n, A) for code in product(range(A), repeat=n - 1))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_decodable_lock_shape_and_value():
    model = comb_lock_decodable(4, 2, 2, "1")
    assert model.S == 3 * 4 - 1 and model.H == 2 * 4 - 2
    assert brute_force_optimal(model)[0] == pytest.approx(1 / 2, abs=1e-12)
    assert is_n_step_decodable(model, 4)
    with pytest.raises(ValueError):
        comb_lock_decodable(2, 2, 2)


# -- families ------------------------------------------------------------------


def test_qx_dist():
    np.testing.assert_allclose(qx_dist([1.0, -0.5]), [0.5, 0, 0.125, 0.375])
    with pytest.raises(ValueError):
        qx_dist([1.5])


def test_greedy_packing_distances():
    xs = greedy_packing(6, 20)
    d = xs.shape[1]
    for i in range(6):
        for j in range(i):
            assert np.abs(xs[i] - xs[j]).sum() >= d / 2
    sym = greedy_packing(5, math.ceil(11 * math.log(10)), symmetric=True)
    for i in range(5):
        for j in range(i):
            assert np.abs(sym[i] + sym[j]).sum() >= sym.shape[1] / 2
    with pytest.raises(ValueError):
        greedy_packing(6, 10)


def test_moment_matching_one_dimension(rng):
    xs = np.linspace(-1, 1, 5)[:, None]
    xi0, xi1 = moment_matching(xs, 4)
    assert not np.any((xi0 > 0) & (xi1 > 0))
    assert moment_gap(xs, xi0, xi1, 4) < 1e-12
    with pytest.raises(ValueError):
        moment_matching(xs, 5)


def _check_family(fam):
    rep = fam.verify()
    assert rep["supports_disjoint"]
    assert rep["separated"], rep
    assert rep["close"] is not False, rep
    return rep


def test_preset_exact_small():
    fam = preset_exact(2, 0.03)
    rep = _check_family(fam)
    assert rep["max_mixture_tv"] < 1e-12
    assert fam.info["moment_gap"] < 1e-9


def test_preset_tradeoff_small():
    fam = preset_tradeoff(2, 0.01, 1.0, d=2)
    _check_family(fam)
    assert fam.gamma > 0


@pytest.mark.parametrize("r", [1, 2])
def test_make_family(r):
    fam = make_family(r, 8, 2, 0.05)
    assert fam.L == 2**r
    _check_family(fam)
    with pytest.raises(ValueError):
        make_family(r, 6, 2, 0.05)


def test_tensor_family_gamma_scales():
    base = preset_exact(2, 0.03)
    fam = tensor_family(base, 2)
    assert fam.L == 4 and fam.n_outcomes == base.n_outcomes**2
    assert fam.gamma == 0.0
    assert fam.min_pairwise_tv() >= base.delta - 1e-12


def test_unif_moments_inequality():
    for fam in (preset_exact(2, 0.03), preset_tradeoff(3, 0.01, 1.0, d=2), make_family(1, 8, 2, 0.05)):
        pts = np.array(fam.info["points"])
        lhs = tv(fam.mixture_power(0), fam.mixture_power(1)) ** 2
        assert lhs <= unif_moments_bound(pts, fam.xis[0], fam.xis[1], fam.H) + 1e-12


# -- augmentation --------------------------------------------------------------


def test_augment_mdp_marginal(rng):
    model = random_separated(2, 3, 2, 3, 0.3, rng)
    mu = np.array([0.2, 0.8])
    aug = augment_mdp(model, 1, mu)
    assert aug.L == 1 and aug.S == 6
    for o in range(2):
        np.testing.assert_allclose(aug.T[0].reshape(3, 2, 2, 3, 2)[:, o].sum(axis=-1), model.T[1])


def test_augmented_lock_is_strongly_separated():
    fam = preset_exact(3, 0.03)
    lock = comb_lock(2, 2, 3, "1")
    aug = augment_lmdp(lock, fam)
    assert aug.L == len(fam.used())
    assert min_pairwise_tv(aug)[0] >= 0.03 - 1e-12
    # observations are independent of the latent lock: same optimal value
    assert brute_force_optimal(aug)[0] == pytest.approx(brute_force_optimal(lock)[0], abs=1e-12)


def _fixed_obs_policy(pi, obs, S, O, A, H):
    """``pi`` run on original states with the observation sequence pinned to ``obs``."""
    layers = []
    for t in range(H):
        n = (S * A) ** t * S
        layer = np.empty((n, A))
        for code in range(n):
            st, ac = decode_prefix(code, t + 1, S, A)
            big = np.array([[s * O + obs[i] for i, s in enumerate(st)]])
            layer[code] = pi.probs(t, big, np.array([ac]).reshape(1, -1))[0]
        layers.append(layer)
    return HistoryTree(S, A, layers)


@pytest.mark.parametrize("preset", ["exact", "tradeoff"])
def test_averaged_policy_value_is_within_gamma(rng, preset):
    H = 3
    fam = preset_exact(H, 0.02) if preset == "exact" else preset_tradeoff(H, 0.01, 1.0, d=2)
    lock = comb_lock(2, 2, H, "1")
    aug = augment_lmdp(lock, fam)
    O = fam.n_outcomes
    q1 = fam.mixture_power(0)
    for _ in range(3):
        pi = HistoryTree.random(aug.S, aug.A, H, rng)
        v_aug = value(aug, pi)
        v_avg = 0.0
        for flat, w in enumerate(q1):
            if w == 0:
                continue
            obs = np.unravel_index(flat, (O,) * H)
            v_avg += w * value(lock, _fixed_obs_policy(pi, obs, lock.S, O, lock.A, H))
        assert abs(v_aug - v_avg) <= fam.gamma + 1e-12


# -- 3SAT -----------------------------------------------------------------------


def test_sat_formula_checks():
    phi = SatFormula(2, ((1, -2), (2,)))
    assert phi.evaluate((1, 1)) and not phi.evaluate((0, 1))
    assert phi.satisfying_assignment() == (1, 1)
    assert not SatFormula(1, ((1,), (-1,))).satisfiable()
    with pytest.raises(ValueError):
        SatFormula(2, ((3,),))


@pytest.mark.parametrize("w", [1, 2])
def test_sat_lmdp_value(w):
    sat = SatFormula(3, ((1, -2), (2, 3), (-1, -3)))
    model = sat_to_lmdp(sat, w)
    assert brute_force_optimal(model)[0] == pytest.approx(1.0, abs=1e-12)
    unsat = SatFormula(2, ((1,), (-1, 2), (-2,)))
    model = sat_to_lmdp(unsat, w)
    assert brute_force_optimal(model)[0] <= 1 - 1 / unsat.N + 1e-12


def test_sat_separated_variant():
    phi = SatFormula(2, ((1,), (-1, 2), (-2,)))
    model = sat_to_separated_lmdp(phi, 2, 0.1)
    assert model.L == 2 * phi.N
    assert min_pairwise_tv(model)[0] >= 0.1 - 1e-12
    assert brute_force_optimal(model)[0] <= unsat_value_bound(phi, 2, 0.1) + 1e-9


def test_optimistic_pair_shares_rewards():
    a, b = optimistic_pair()
    assert np.array_equal(a.R, b.R)
    assert brute_force_optimal(b)[0] > brute_force_optimal(a)[0]
