"""Extended logic programs under answer-set semantics."""

from lossprobe.elp.program import Clause, Literal, Program, parse_program, print_program
from lossprobe.elp.solver import (
    MAX_LITERALS, AnswerSet, Entailment, LeastModel, Mode, SolveResult,
    answer_sets, entails, least_model, reduct,
)
from lossprobe.elp.oracle import oracle_answer_sets

__all__ = [
    "Clause", "Literal", "Program", "parse_program", "print_program",
    "MAX_LITERALS", "AnswerSet", "Entailment", "LeastModel", "Mode", "SolveResult",
    "answer_sets", "entails", "least_model", "reduct", "oracle_answer_sets",
]
