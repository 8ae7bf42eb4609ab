"""Consistency proofs, assumption weakening and abstract loss scenarios."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from lossprobe.elp.program import Clause, Literal, Program
from lossprobe.elp.solver import AnswerSet, answer_sets, canonical_key
from lossprobe.stpa.compile import SC_HOLDS, VIOLATION, compile_formula, compile_to_elp
from lossprobe.stpa.formula import (
    And, Const, Formula, Iff, Implies, Not, evaluate, models, props,
)
from lossprobe.stpa.model import AssumptionSet, SafetyModel

MAX_COUNTEREXAMPLES = 16
SCENARIO_ROLES = ("environment", "plant")


class Status(str, Enum):
    PROVED = "proved"
    REFUTED = "refuted"
    INCONSISTENT = "inconsistent_model"


class Kind(str, Enum):
    DROP_FORWARD = "drop_forward"
    DROP_BACKWARD = "drop_backward"
    NEGATE_FORWARD = "negate_forward"
    NEGATE_BACKWARD = "negate_backward"
    DROP_ALL = "drop_all"


KIND_ORDER = {k: i for i, k in enumerate(Kind)}


@dataclass(frozen=True)
class Verdict:
    status: Status
    target: str
    counterexamples: tuple[AnswerSet, ...] = ()      # projected onto proposition atoms
    argument_trace: tuple[str, ...] = ()
    total_counterexamples: int = 0
    answer_set_count: int = 0
    # full answer sets behind ``counterexamples``; kept for cross-checks
    witnesses: tuple[AnswerSet, ...] = field(default=(), compare=False, repr=False)

    @property
    def proved(self) -> bool:
        return self.status is Status.PROVED

    @property
    def refuted(self) -> bool:
        return self.status is Status.REFUTED


@dataclass(frozen=True)
class Weakening:
    slot: str
    domain: str
    original: Formula
    replacement: Formula
    kind: Kind

    @property
    def label(self) -> str:
        return f"{self.slot}/{self.kind.value}"

    def __str__(self):
        return f"{self.label}: {self.original}  =>  {self.replacement}"


@dataclass(frozen=True)
class AbstractLossScenario:
    id: str
    literals: tuple[tuple[str, bool], ...]    # (proposition id, polarity) in declaration order
    source_weakening: Weakening | None
    violated_sc: str
    linked_hazards: tuple[str, ...]

    @property
    def text(self) -> str:
        return " & ".join(p if s else f"!{p}" for p, s in self.literals)

    def formula(self) -> Formula:
        from lossprobe.stpa.formula import Prop, conjoin
        return conjoin(Prop(p) if s else Not(Prop(p)) for p, s in self.literals)

    def __str__(self):
        return self.text


# --- literal rendering ------------------------------------------------------


def literal_text(model: SafetyModel, lit: Literal) -> str:
    """``MV`` / ``!WT`` for proposition atoms, ELP syntax otherwise."""
    decl = model.prop_of_atom(lit.atom)
    if decl is None:
        return str(lit)
    return f"!{decl.id}" if lit.negated else decl.id


def answer_set_texts(model: SafetyModel, s: AnswerSet) -> list[str]:
    order = {p.atom: i for i, p in enumerate(model.propositions)}
    lits = sorted(s, key=lambda l: (order.get(l.atom, len(order)), l.atom, l.negated))
    return [literal_text(model, l) for l in lits]


# --- argument traces --------------------------------------------------------


def _derivation(program: Program, s: AnswerSet):
    """For every literal of ``s``, the clause (or choice) that first derives it.

    Non-choice clauses of the reduct are preferred; a free choice is taken
    (in canonical order) only when nothing else fires.
    """
    clauses = [c for c in program.clauses if not any(l in s for l in c.naf_body)]
    choice_lits = sorted((l for l in s if l.atom in {c.atom for c in program.choices}),
                         key=lambda l: canonical_key(program)([l]))
    why: dict[Literal, Clause | None] = {}
    while True:
        fired = False
        for c in clauses:
            if c.head not in why and c.head in s and all(l in why for l in c.positive_body):
                why[c.head] = c
                fired = True
        if fired:
            continue
        pending = [l for l in choice_lits if l not in why]
        if not pending:
            break
        why[pending[0]] = None
    return why


def argument_trace(program: Program, s: AnswerSet, goal: Literal) -> list[str]:
    why = _derivation(program, s)
    lines: list[str] = []
    shown: set[Literal] = set()

    def walk(lit, depth):
        pad = "  " * depth
        clause = why.get(lit)
        if lit in shown:
            lines.append(f"{pad}{lit}  (see above)")
            return
        shown.add(lit)
        if clause is None:
            lines.append(f"{pad}{lit}  <- free choice")
            return
        tag = f"[{clause.origin}] " if clause.origin else ""
        lines.append(f"{pad}{lit}  <- {tag}{clause}")
        for body in clause.positive_body:
            walk(body, depth + 1)
        for body in clause.naf_body:
            lines.append(f"{pad}  not {body}  (underivable)")

    if goal in why:
        walk(goal, 0)
    return lines


# --- verification -----------------------------------------------------------


def _verdict(model: SafetyModel, program: Program, target: str) -> Verdict:
    result = answer_sets(program)
    if result.inconsistent or not result.answer_sets:
        why = "contradictory facts" if result.inconsistent else "no answer sets"
        return Verdict(Status.INCONSISTENT, target,
                       argument_trace=(f"assumptions and control constraints are unsatisfiable ({why})",))
    atoms = [p.atom for p in model.propositions]
    bad = [s for s in result if VIOLATION in s]
    if not bad:
        trace = [f"{target}: {SC_HOLDS} holds in all {len(result)} answer set(s)"]
        for i, s in enumerate(result, 1):
            trace.append(f"answer set {i}: {{{', '.join(answer_set_texts(model, s.project(atoms)))}}}")
            trace += ["  " + line for line in argument_trace(program, s, SC_HOLDS)]
        return Verdict(Status.PROVED, target, (), tuple(trace), 0, len(result))
    kept = bad[:MAX_COUNTEREXAMPLES]
    trace = []
    for i, s in enumerate(kept, 1):
        trace.append(f"counterexample {i}: {{{', '.join(answer_set_texts(model, s.project(atoms)))}}}")
        trace += ["  " + line for line in argument_trace(program, s, VIOLATION)]
    return Verdict(Status.REFUTED, target, tuple(s.project(atoms) for s in kept), tuple(trace),
                   len(bad), len(result), tuple(kept))


def verify(model: SafetyModel, assumptions: AssumptionSet | None = None, target_sc: str = "SC-3",
           quantify: str | None = None, control: str | None = None) -> Verdict:
    program = compile_to_elp(model, assumptions, target_sc, quantify, control)
    return _verdict(model, program, target_sc)


def prove_anti(model: SafetyModel, anti_sc: Formula, assumptions: AssumptionSet | None = None,
               quantify: str | None = None, control: str | None = None) -> Verdict:
    """Check that the anti-constraint ``anti_sc`` holds in every admissible situation."""
    if assumptions is None:
        assumptions = model.original_assumptions()
    program = compile_formula(model, assumptions, anti_sc, "anti", quantify, control)
    return _verdict(model, program, f"anti: {anti_sc}")


# --- weakening --------------------------------------------------------------


def _relation_ok(original: Formula, replacement: Formula) -> bool:
    """Replacement must be strictly weaker than, or incomparable to, the original."""
    names = list(dict.fromkeys(props(original) + props(replacement)))
    orig = [evaluate(original, env) for env in _envs(names)]
    repl = [evaluate(replacement, env) for env in _envs(names)]
    if orig == repl:
        return False
    stronger = all(o or not r for o, r in zip(orig, repl))   # replacement entails original
    return not stronger


def _envs(names):
    from lossprobe.stpa.formula import assignments
    return list(assignments(names))


def candidate_weakenings(slot: str, domain: str, f: Formula) -> list[Weakening]:
    out = []
    if isinstance(f, Iff):
        fwd, bwd = Implies(f.left, f.right), Implies(f.right, f.left)
        out = [
            (Kind.DROP_FORWARD, bwd),
            (Kind.DROP_BACKWARD, fwd),
            (Kind.NEGATE_FORWARD, And(bwd, Not(fwd))),
            (Kind.NEGATE_BACKWARD, And(fwd, Not(bwd))),
            (Kind.DROP_ALL, Const(True)),
        ]
    elif isinstance(f, Implies):
        out = [(Kind.NEGATE_FORWARD, Not(f)), (Kind.DROP_ALL, Const(True))]
    else:
        out = [(Kind.DROP_ALL, Const(True))]
    return [Weakening(slot, domain, f, r, k) for k, r in out if _relation_ok(f, r)]


def weaken_assumptions(model: SafetyModel, target_sc: str, quantify: str | None = None,
                       control: str | None = None) -> list[tuple[Weakening, Verdict]]:
    base = model.original_assumptions()
    ws = [w for e in base for w in candidate_weakenings(e.slot, e.domain, e.formula)]
    ws.sort(key=lambda w: (w.slot, KIND_ORDER[w.kind]))
    out = []
    for w in ws:
        assumptions = base.replace(w.slot, w.replacement, "weakened", w.kind.value)
        out.append((w, verify(model, assumptions, target_sc, quantify, control)))
    return out


# --- scenarios --------------------------------------------------------------


def _linked_hazards(model: SafetyModel, sc_id: str, env: dict) -> tuple[str, ...]:
    """Hazards of ``sc_id`` reached through finer constraints the situation violates."""
    try:
        target = model.constraint(sc_id)
    except KeyError:
        return ()
    linked = []
    for sc in model.system_constraints:
        if sc.id == sc_id or not set(sc.hazards) <= set(target.hazards):
            continue
        if all(p in env for p in props(sc.formula)) and not evaluate(sc.formula, env):
            linked += [h for h in sc.hazards if h not in linked]
    if not linked:
        linked = list(target.hazards)
    order = [h.id for h in model.hazards]
    return tuple(sorted(linked, key=order.index))


def extract_scenarios(results, model: SafetyModel,
                      roles=SCENARIO_ROLES) -> list[AbstractLossScenario]:
    keep = [p for p in model.propositions if p.role in roles]
    seen: dict[tuple, AbstractLossScenario] = {}
    for weakening, verdict in results:
        if not verdict.refuted:
            continue
        for cex in verdict.counterexamples:
            env = {}
            for lit in cex:
                decl = model.prop_of_atom(lit.atom)
                if decl is not None:
                    env[decl.id] = not lit.negated
            lits = tuple((p.id, env[p.id]) for p in keep if p.id in env)
            if not lits or lits in seen:
                continue
            seen[lits] = AbstractLossScenario(
                f"LS-{len(seen) + 1}", lits, weakening, verdict.target,
                _linked_hazards(model, verdict.target, env))
    return list(seen.values())


def check_counterexample(model: SafetyModel, assumptions: AssumptionSet, target: Formula,
                         cex: AnswerSet, control: str | None = None) -> bool:
    """Truth-table cross-check: ``cex`` satisfies assumptions and control but not ``target``."""
    env = {}
    for lit in cex:
        decl = model.prop_of_atom(lit.atom)
        if decl is not None:
            env[decl.id] = not lit.negated
    formulas = [e.formula for e in assumptions] + [f for _, f in model.control_formulas(control)]
    needed = {p for f in formulas + [target] for p in props(f)}
    if not needed <= env.keys():
        return False
    return all(evaluate(f, env) for f in formulas) and not evaluate(target, env)


__all__ = [
    "Status", "Kind", "Verdict", "Weakening", "AbstractLossScenario", "verify", "prove_anti",
    "candidate_weakenings", "weaken_assumptions", "extract_scenarios", "check_counterexample",
    "literal_text", "answer_set_texts", "argument_trace", "models",
]
