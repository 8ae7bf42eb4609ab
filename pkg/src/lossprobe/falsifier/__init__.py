"""Concretizing abstract scenarios on the vehicle simulator."""

from lossprobe.falsifier.bridge import DEFAULT_BRIDGE, Bridge, Predicate, parse_predicate
from lossprobe.falsifier.space import Axis, ParameterSpace, default_space, parse_space
from lossprobe.falsifier.robustness import eval_propositions, hit_window, realized, robustness
from lossprobe.falsifier.search import (
    BUDGET_EXHAUSTED, FOUND, NOT_FOUND, BoundaryResult, FalsificationResult, Witness,
    boundary_refine, falsify,
)

__all__ = [
    "DEFAULT_BRIDGE", "Bridge", "Predicate", "parse_predicate", "Axis", "ParameterSpace",
    "default_space", "parse_space", "eval_propositions", "hit_window", "realized", "robustness",
    "BUDGET_EXHAUSTED", "FOUND", "NOT_FOUND", "BoundaryResult", "FalsificationResult", "Witness",
    "boundary_refine", "falsify",
]
