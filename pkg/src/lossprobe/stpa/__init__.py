"""STPA artefacts, formulas and their translation to logic programs."""

from lossprobe.stpa.formula import (
    And, Const, Formula, Iff, Implies, Not, Or, Prop, evaluate, models, parse_formula, props,
)
from lossprobe.stpa.model import (
    AssumptionEntry, AssumptionSet, SafetyModel, load_model, parse_model,
)
from lossprobe.stpa.compile import compile_formula, compile_to_elp, formula_to_clauses

__all__ = [
    "And", "Const", "Formula", "Iff", "Implies", "Not", "Or", "Prop", "evaluate", "models",
    "parse_formula", "props", "AssumptionEntry", "AssumptionSet", "SafetyModel", "load_model",
    "parse_model", "compile_formula", "compile_to_elp", "formula_to_clauses",
]
