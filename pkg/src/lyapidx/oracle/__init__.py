"""Exact offline oracles: stationary distributions and the occupation-measure LP."""
from .lp import (CompositeLP, FeasibleAction, build_occupation_lp, enumerate_feasible_actions,
                 optimal_value, transition_prob)
from .markov import steady_state
from .simplex import LPResult, solve_lp

__all__ = [
    "CompositeLP", "FeasibleAction", "LPResult", "build_occupation_lp",
    "enumerate_feasible_actions", "optimal_value", "solve_lp", "steady_state", "transition_prob",
]
