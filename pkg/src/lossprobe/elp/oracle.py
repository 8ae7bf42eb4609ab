"""Brute-force answer-set enumeration, kept independent of the search in ``solver``.

Every atom is tried as absent, positive or classically negated (3**n
candidates) and each candidate is checked against its own reduct fixpoint.
Only used as a test oracle.
"""

from __future__ import annotations

from itertools import product

from lossprobe.elp.program import Literal, Program
from lossprobe.elp.solver import AnswerSet
from lossprobe.errors import SolverLimitError

MAX_ORACLE_LITERALS = 20


def oracle_answer_sets(program: Program) -> list[AnswerSet]:
    atoms = program.atoms
    if 2 * len(atoms) > MAX_ORACLE_LITERALS:
        raise SolverLimitError(
            f"oracle handles at most {MAX_ORACLE_LITERALS} literals, got {2 * len(atoms)}")
    bit = {}
    for i, a in enumerate(atoms):
        bit[Literal(a)] = 1 << (2 * i)
        bit[Literal(a, True)] = 1 << (2 * i + 1)

    def mask(lits):
        m = 0
        for l in lits:
            m |= bit[l]
        return m

    rules = [(bit[c.head], mask(c.positive_body), mask(c.naf_body)) for c in program.clauses]
    pairs = [(bit[l], bit[l.complement()]) for l in program.choices]

    stable = []
    for choice in product((0, 1, 2), repeat=len(atoms)):
        s = 0
        for i, c in enumerate(choice):
            if c:
                s |= 1 << (2 * i + c - 1)
        # reduct
        facts = 0
        for pos_bit, neg_bit in pairs:
            if not s & neg_bit:
                facts |= pos_bit
            if not s & pos_bit:
                facts |= neg_bit
        live = [(h, p) for h, p, n in rules if not n & s]
        m = facts
        while True:
            grown = m
            for h, p in live:
                if p & grown == p:
                    grown |= h
            if grown == m:
                break
            m = grown
        if m != s:
            continue
        stable.append(s)
    stable.sort()
    lits = sorted(bit, key=bit.get)
    return [AnswerSet(l for l in lits if s & bit[l]) for s in stable]
