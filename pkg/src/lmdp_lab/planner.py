"""Short-memory planning with context inference.

Beyond the window every component is solved on its own by value iteration.
At the window the latent index is decoded by maximum likelihood and the
decoded component's value, weighted by its posterior mass, is stitched onto
the prefix. Below the window a backward DP over the full history tree uses
the exact posterior-mixture transitions.

The head DP runs on unnormalized values: ``U(node) = P(node) * Vhat(node)``
where ``P(node)`` is the model probability of the prefix (policy factor
excluded). Then ``U`` at the window is ``w_m * Vhat_m(s_W)`` for the decoded
``m`` and joint weight ``w_m``, and the backup needs no division.
"""

from dataclasses import dataclass, field

import numpy as np

from ._config import check_budget
from .core import full_weights, mdp_value_iteration
from .inference import decode_scores, log_scores
from .model import decode_prefix, encode_prefix
from .policies import Policy
from .separation import certified_varpi

STITCHES = ("decoded", "mixture")


@dataclass(eq=False)
class PlannerPolicy(Policy):
    """Planner output.

    ``head[t]`` holds the action of every prefix code with ``t+1`` states for
    ``t < W-1``; ``decoder`` maps prefix codes with ``W`` states to component
    indices; ``tails[m, t, s]`` is component ``m``'s greedy action at step
    ``t``; ``certificate`` is ``E_{s_1}[Vhat(s_1)]``.
    """

    S: int
    A: int
    H: int
    window: int
    head: list
    decoder: np.ndarray
    tails: np.ndarray
    tail_values: np.ndarray
    certificate: float
    stitch: str = "decoded"
    head_values: list = field(default=None, repr=False)
    head_q: list = field(default=None, repr=False)

    def probs(self, t, states, actions):
        n = states.shape[0]
        W = self.window
        if t < W - 1:
            a = self.head[t][encode_prefix(states, actions, self.S, self.A)]
        else:
            codes = encode_prefix(states[:, :W], actions[:, : W - 1], self.S, self.A)
            m = self.decoder[codes]
            a = self.tails[m, t, states[:, t]]
        out = np.zeros((n, self.A))
        out[np.arange(n), a] = 1.0
        return out

    def decode(self, states, actions):
        code = encode_prefix(np.asarray(states)[: self.window], np.asarray(actions)[: self.window - 1], self.S, self.A)
        return int(self.decoder[code])

    def to_json(self):
        return {
            "kind": "planner_policy",
            "S": self.S,
            "A": self.A,
            "H": self.H,
            "window": self.window,
            "stitch": self.stitch,
            "certificate": repr(self.certificate),
            "head": [h.tolist() for h in self.head],
            "decoder": self.decoder.tolist(),
            "tails": self.tails.tolist(),
            "tail_values": [[[repr(float(x)) for x in row] for row in m] for m in self.tail_values],
        }

    @classmethod
    def from_json(cls, doc):
        return cls(
            S=doc["S"],
            A=doc["A"],
            H=doc["H"],
            window=doc["window"],
            head=[np.asarray(h, dtype=np.int64) for h in doc["head"]],
            decoder=np.asarray(doc["decoder"], dtype=np.int64),
            tails=np.asarray(doc["tails"], dtype=np.int64),
            tail_values=np.asarray(doc["tail_values"], dtype=np.float64),
            certificate=float(doc["certificate"]),
            stitch=doc.get("stitch", "decoded"),
        )

    def __repr__(self):
        return f"PlannerPolicy(W={self.window}, H={self.H}, stitch={self.stitch!r})"


def plan(model, W, budget=None, stitch="decoded", keep_values=False):
    """Plan with decode window ``W`` (1-indexed steps, ``1 <= W <= H``).

    ``stitch="mixture"`` replaces the decoded component's value at the window
    with the posterior average over all components (never smaller).
    ``keep_values`` stores the normalized ``Vhat`` and ``Qhat`` of every head
    node for inspection.
    """
    S, A, H, L = model.S, model.A, model.H, model.L
    if not 1 <= W <= H:
        raise ValueError("W must lie in 1..H")
    if stitch not in STITCHES:
        raise ValueError(f"stitch must be one of {STITCHES}")
    check_budget((S * A) ** (W - 1) * S * A, budget, what="planner head tree")

    tails = np.zeros((L, H, S), dtype=np.int64)
    tail_values = np.zeros((L, H + 1, S))
    for m in range(L):
        V, _, pol = mdp_value_iteration(model, m, h0=W)
        tails[m] = np.argmax(pol.table, axis=-1)
        tail_values[m] = V

    ws = full_weights(model, W, budget)
    wW = ws[W - 1]
    sW = np.arange(wW.shape[0]) % S
    codes = np.arange(wW.shape[0])
    st = np.empty((len(codes), W), dtype=np.int64)
    ac = np.empty((len(codes), max(W - 1, 0)), dtype=np.int64)
    rem = codes.copy()
    for t in range(W - 1, 0, -1):
        rem, st[:, t] = np.divmod(rem, S)
        rem, ac[:, t - 1] = np.divmod(rem, A)
    st[:, 0] = rem
    decoder, _ = decode_scores(log_scores(model, st, ac), model.support)
    vW = tail_values[:, W - 1, :][:, sW].T  # (n, L)
    if stitch == "decoded":
        U = wW[codes, decoder] * vW[codes, decoder]
    else:
        U = (wW * vW).sum(axis=1)

    head = [None] * (W - 1)
    head_values = [None] * W if keep_values else None
    head_q = [None] * (W - 1) if keep_values else None
    if keep_values:
        head_values[W - 1] = _normalize(U, wW.sum(axis=1))
    for t in range(W - 2, -1, -1):
        mass = ws[t].sum(axis=1)
        s = np.arange(mass.shape[0]) % S
        Q = model.R[t, s] * mass[:, None] + U.reshape(-1, A, S).sum(axis=2)
        head[t] = np.argmax(Q, axis=1)
        U = Q.max(axis=1)
        if keep_values:
            head_values[t] = _normalize(U, mass)
            head_q[t] = _normalize(Q, mass[:, None])
    return PlannerPolicy(
        S=S,
        A=A,
        H=H,
        window=W,
        head=head,
        decoder=decoder.astype(np.int64),
        tails=tails,
        tail_values=tail_values,
        certificate=float(U.sum()),
        stitch=stitch,
        head_values=head_values,
        head_q=head_q,
    )


def _normalize(U, mass):
    out = np.zeros(np.broadcast(U, mass).shape)
    np.divide(U, mass, out=out, where=mass > 0)
    return out


def choose_window(model, epsilon, h_max=None):
    """Smallest ``W`` whose certified separation reaches ``log(L / epsilon)``.

    Returns 1 for a single-component model and ``None`` when no window up to
    ``h_max`` (default ``H``) is certified.
    """
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if len(model.support) == 1:
        return 1
    h_max = model.H if h_max is None else h_max
    prof = certified_varpi(model, h_max)
    W = prof.inverse(np.log(model.L / epsilon))
    return None if W == np.inf else int(W)


def prefix_of(code, W, S, A):
    return decode_prefix(code, W, S, A)
