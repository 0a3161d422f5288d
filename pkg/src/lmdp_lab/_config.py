"""Process-wide knobs: enumeration budget and kernel backend selection."""

import os

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    """Raised when an exact enumeration would materialize more nodes than allowed."""


def enumeration_budget(budget=None):
    if budget is not None:
        return int(budget)
    env = os.environ.get("LMDP_LAB_BUDGET")
    if env:
        return int(float(env))
    return DEFAULT_BUDGET


def check_budget(n_nodes, budget=None, what="tree layer"):
    limit = enumeration_budget(budget)
    if n_nodes > limit:
        raise BudgetExceeded(f"{what} needs {n_nodes} nodes, budget is {limit}")


def use_numba():
    """True unless LMDP_LAB_NUMBA is set to a false-ish value."""
    flag = os.environ.get("LMDP_LAB_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")
