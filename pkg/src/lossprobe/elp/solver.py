"""Answer-set semantics for propositional extended logic programs.

Choices are free even loops: for a pair ``{L, -L}`` the reduct with respect to
a candidate ``S`` contains the fact ``L`` exactly when ``-L`` is not in ``S``
(and symmetrically), so every answer set picks one side of each pair.

A program is *inconsistent* when the closure of its negation-free clauses is
contradictory; under the classical definition its only answer set would then
be the set of all literals, which we report as a flag instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from lossprobe.elp.program import Clause, Literal, Program
from lossprobe.errors import InconsistentCandidate, SolverLimitError

#: maximum number of literals (two per atom) answer_sets will accept
MAX_LITERALS = 512


class AnswerSet(frozenset):
    """A consistent set of literals."""

    def __new__(cls, literals: Iterable[Literal] = ()):
        self = super().__new__(cls, literals)
        for lit in self:
            if lit.complement() in self:
                raise InconsistentCandidate(f"answer set contains both {lit} and its complement")
        return self

    def __repr__(self):
        return "{" + ", ".join(sorted(map(str, self), key=lambda s: (s.lstrip("-"), s))) + "}"

    def project(self, atoms: Iterable[str]) -> AnswerSet:
        keep = set(atoms)
        return AnswerSet(l for l in self if l.atom in keep)


@dataclass(frozen=True)
class LeastModel:
    literals: frozenset
    contradictory: bool


@dataclass(frozen=True)
class SolveResult:
    answer_sets: tuple[AnswerSet, ...]
    inconsistent: bool

    def __iter__(self):
        return iter(self.answer_sets)

    def __len__(self):
        return len(self.answer_sets)


class Mode(str, Enum):
    BRAVE = "brave"
    CAUTIOUS = "cautious"


@dataclass(frozen=True)
class Entailment:
    holds: bool
    inconsistent: bool

    def __bool__(self):
        return self.holds


def _consistent(literals) -> bool:
    return not any(l.complement() in literals for l in literals)


def canonical_key(program: Program):
    """Sort key placing answer sets in bitmask order over the symbol table."""
    index = {a: i for i, a in enumerate(program.atoms)}

    def key(literals):
        mask = 0
        for lit in literals:
            mask |= 1 << (2 * index[lit.atom] + lit.negated)
        return mask

    return key


def reduct(program: Program, candidate: Iterable[Literal]) -> Program:
    """Gelfond-Lifschitz reduct of ``program`` with respect to ``candidate``."""
    candidate = frozenset(candidate)
    if not _consistent(candidate):
        raise InconsistentCandidate("reduct requires a consistent candidate")
    kept = [Clause(c.head, c.positive_body, (), c.origin)
            for c in program.clauses if not any(l in candidate for l in c.naf_body)]
    facts = []
    for lit, comp in program.choice_pairs():
        if comp not in candidate:
            facts.append(Clause(lit, origin="choice"))
        if lit not in candidate:
            facts.append(Clause(comp, origin="choice"))
    return Program(tuple(kept + facts), allow_choice_heads=True)


def least_model(program: Program) -> LeastModel:
    """Forward-chaining fixpoint of a negation-free program."""
    if program.has_naf() or program.choices:
        # choices are even loops through 'not'
        raise ValueError("least_model requires a program without 'not' or choices")
    rules = list(program.clauses)
    model: set[Literal] = set()
    changed = True
    while changed:
        changed = False
        for clause in rules:
            if clause.head not in model and all(l in model for l in clause.positive_body):
                model.add(clause.head)
                changed = True
    return LeastModel(frozenset(model), not _consistent(model))


class _Compiled:
    """Integer-indexed form of a program used by the search."""

    def __init__(self, program: Program):
        self.program = program
        self.atoms = program.atoms
        if 2 * len(self.atoms) > MAX_LITERALS:
            raise SolverLimitError(
                f"program has {2 * len(self.atoms)} literals; the solver limit is {MAX_LITERALS}")
        index = {a: i for i, a in enumerate(self.atoms)}
        self.lit_of = [Literal(a, neg) for a in self.atoms for neg in (False, True)]

        def ix(lit):
            return 2 * index[lit.atom] + lit.negated

        rules = [(ix(c.head), [ix(l) for l in c.positive_body], [ix(l) for l in c.naf_body])
                 for c in program.clauses]
        for lit, comp in program.choice_pairs():
            rules.append((ix(lit), [], [ix(comp)]))
            rules.append((ix(comp), [], [ix(lit)]))
        self.rules = rules
        self.naf_lits = sorted({b for _, _, naf in rules for b in naf})
        # watch lists for counter-based propagation
        self.by_body: dict[int, list[int]] = {}
        for r, (_, pos, _) in enumerate(rules):
            for b in set(pos):
                self.by_body.setdefault(b, []).append(r)

    def closure(self, active) -> set[int]:
        """Least model of the rules whose index is in ``active`` (naf ignored)."""
        need = {}
        model: set[int] = set()
        queue = []
        for r in active:
            head, pos, _ = self.rules[r]
            n = len(set(pos))
            need[r] = n
            if n == 0 and head not in model:
                model.add(head)
                queue.append(head)
        while queue:
            lit = queue.pop()
            for r in self.by_body.get(lit, ()):
                if r in need:
                    need[r] -= 1
                    if need[r] == 0:
                        head = self.rules[r][0]
                        if head not in model:
                            model.add(head)
                            queue.append(head)
        return model

    @staticmethod
    def contradictory(model) -> bool:
        return any((l ^ 1) in model for l in model if not l & 1)


def _search(comp: _Compiled):
    rules = comp.rules
    naf_lits = comp.naf_lits
    results = []

    def propagate(assign: dict):
        while True:
            sure = [r for r, (_, _, naf) in enumerate(rules)
                    if all(assign.get(b) is False for b in naf)]
            maybe = [r for r, (_, _, naf) in enumerate(rules)
                     if not any(assign.get(b) is True for b in naf)]
            lower = comp.closure(sure)
            if comp.contradictory(lower):
                return None
            upper = comp.closure(maybe)
            changed = False
            for b in naf_lits:
                val = assign.get(b)
                if val is True and b not in upper:
                    return None
                if val is False and b in lower:
                    return None
                if val is None:
                    if b in lower:
                        assign[b] = True
                        changed = True
                    elif b not in upper:
                        assign[b] = False
                        changed = True
            if not changed:
                return lower

    def branch(assign: dict):
        lower = propagate(assign)
        if lower is None:
            return
        free = [b for b in naf_lits if b not in assign]
        if not free:
            results.append(lower)
            return
        b = free[0]
        for val in (True, False):
            nxt = dict(assign)
            nxt[b] = val
            branch(nxt)

    branch({})
    return results


def answer_sets(program: Program) -> SolveResult:
    """All consistent answer sets of ``program`` in canonical order."""
    comp = _Compiled(program)
    base = comp.closure([r for r, (_, _, naf) in enumerate(comp.rules) if not naf])
    if comp.contradictory(base):
        return SolveResult((), True)
    found = []
    for model in _search(comp):
        if comp.contradictory(model):
            continue
        found.append(AnswerSet(comp.lit_of[i] for i in model))
    found.sort(key=canonical_key(program))
    return SolveResult(tuple(found), False)


def entails(program: Program, goal: Literal, mode: Mode | str = Mode.CAUTIOUS) -> Entailment:
    mode = Mode(mode)
    result = answer_sets(program)
    if result.inconsistent or not result.answer_sets:
        return Entailment(False, result.inconsistent)
    if mode is Mode.BRAVE:
        return Entailment(any(goal in s for s in result), False)
    return Entailment(all(goal in s for s in result), False)
