"""Augmenting MDPs with auxiliary observations drawn afresh at every step."""

import numpy as np

from ..divergences import as_dist
from ..model import Lmdp


def augment_mdp(model, m, mu):
    """Component ``m`` tensored with ``mu``: a one-component model over ``S x O``.

    The augmented state ``(s, o)`` has index ``s * |O| + o``; the next
    observation is drawn from ``mu`` independently of everything else.
    """
    mu = as_dist(mu)
    nu, T = _tensor_component(model.nu[m], model.T[m], mu)
    return Lmdp(np.ones(1), nu[None], T[None], lift_reward(model.R, len(mu)), {"augmented_from": int(m)})


def _tensor_component(nu, T, mu):
    S, A = T.shape[0], T.shape[1]
    O = len(mu)
    nu2 = np.kron(nu, mu)
    # T2[(s,o), a, (s',o')] = T[s, a, s'] mu[o']
    T2 = np.einsum("sat,p->satp", T, mu).reshape(S, A, S * O)
    T2 = np.repeat(T2, O, axis=0)
    return nu2, T2


def lift_reward(R, O):
    return np.repeat(R, O, axis=1)


def augment_lmdp(model, fam):
    """The model ``M (x) Q``: component ``i`` of latent ``m`` is ``M_m (x) mu_i`` with weight ``rho(m) xi_m(i)``.

    Only pairs with positive weight are kept, ordered by ``m`` then ``i``.
    """
    if fam.L != model.L:
        raise ValueError(f"family has {fam.L} mixing weights but the model has {model.L} components")
    rho, nus, Ts, pairs = [], [], [], []
    for m in range(model.L):
        for i in np.flatnonzero(fam.xis[m] > 0):
            w = model.rho[m] * fam.xis[m, i]
            if w <= 0:
                continue
            nu, T = _tensor_component(model.nu[m], model.T[m], fam.mus[i])
            rho.append(w)
            nus.append(nu)
            Ts.append(T)
            pairs.append((int(m), int(i)))
    rho = np.array(rho)
    rho = rho / rho.sum()
    meta = dict(model.metadata)
    meta.update(
        {
            "augmented": True,
            "n_outcomes": int(fam.n_outcomes),
            "component_map": pairs,
            "delta": float(fam.delta),
            "gamma": float(fam.gamma),
        }
    )
    return Lmdp(rho, np.array(nus), np.array(Ts), lift_reward(model.R, fam.n_outcomes), meta)


def project_states(states, O):
    """Original state indices of augmented states."""
    return np.asarray(states) // O
