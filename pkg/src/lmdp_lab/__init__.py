"""Exact tools for latent Markov decision processes at desk scale."""

from ._config import BudgetExceeded, enumeration_budget
from .core import (
    brute_force_optimal,
    mdp_value_iteration,
    simulate,
    traj_dist,
    traj_prob,
    value,
)
from .divergences import bhattacharyya, hellinger_sq, left_inverse, product_dist, tv
from .model import Lmdp, Trajectory
from .policies import Concat, HistoryTree, Markov, Mixture, OpenLoop, Uniform

__version__ = "0.1.0"
