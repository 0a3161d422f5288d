"""Constructive hard instances and random test instances."""

from .augment import augment_lmdp, augment_mdp
from .families import (
    Family,
    greedy_packing,
    make_family,
    moment_matching,
    preset_exact,
    preset_tradeoff,
    qx_dist,
    tensor_family,
)
from .locks import comb_lock, comb_lock_decodable, lock_sequences, lock_weight
from .random_instances import optimistic_pair, random_lmdp, random_separated
from .sat import SatFormula, sat_to_lmdp, sat_to_separated_lmdp, unsat_value_bound
