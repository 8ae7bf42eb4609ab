"""Lowering of propositional formulas and safety models to extended logic programs."""

from __future__ import annotations

from typing import Callable

from lossprobe.elp.program import Clause, Literal, Program
from lossprobe.errors import ModelError
from lossprobe.stpa.formula import Formula, cnf, dnf, iff_depth, props
from lossprobe.stpa.model import AssumptionSet, SafetyModel

VIOLATION = Literal("violation")
NO_VIOLATION = Literal("violation", True)
SC_HOLDS = Literal("sc_holds")
BOTTOM = Literal("bottom")
MAX_IFF_DEPTH = 2


def _lit(name: str, positive: bool, atom_of: Callable[[str], str]) -> Literal:
    return Literal(atom_of(name), not positive)


def formula_to_clauses(f: Formula, polarity: str, atom_of: Callable[[str], str] = str.lower,
                       origin: str = "") -> list[Clause]:
    """Clauses for ``f`` in ``define`` or ``violate`` polarity.

    ``define`` turns every CNF clause ``l1 | ... | lk`` into the k rules
    ``li :- -l1, ..., -lk`` (all contrapositives).  ``violate`` emits one
    ``violation :- conj`` per conjunct of the DNF of ``!f``.
    """
    if iff_depth(f) > MAX_IFF_DEPTH:
        raise ModelError(f"nested '<->' deeper than {MAX_IFF_DEPTH} is not supported: {f}")
    out: list[Clause] = []
    if polarity == "define":
        for disj in cnf(f):
            if not disj:
                # unsatisfiable: make the program inconsistent
                out += [Clause(BOTTOM, origin=origin), Clause(-BOTTOM, origin=origin)]
                continue
            lits = [_lit(n, s, atom_of) for n, s in disj]
            for i in reversed(range(len(lits))):
                body = tuple(-l for j, l in enumerate(lits) if j != i)
                out.append(Clause(lits[i], body, origin=origin))
    elif polarity == "violate":
        for conj in dnf(f, positive=False):
            out.append(Clause(VIOLATION, tuple(_lit(n, s, atom_of) for n, s in conj), origin=origin))
    else:
        raise ValueError(f"polarity must be 'define' or 'violate', got {polarity!r}")
    return out


def _ordered_props(model: SafetyModel, formulas) -> list[str]:
    used = set()
    for f in formulas:
        used.update(props(f))
    return [p.id for p in model.propositions if p.id in used]


def compile_formula(model: SafetyModel, assumptions: AssumptionSet, target: Formula,
                    target_origin: str = "target", quantify: str | None = None,
                    control: str | None = None) -> Program:
    """Program checking ``assumptions + control`` against ``target``.

    Its answer sets are the admissible situations; ``sc_holds`` is in exactly
    those where ``target`` is satisfied.
    """
    quantify = quantify or model.quantify
    controls = model.control_formulas(control)
    formulas = [e.formula for e in assumptions] + [f for _, f in controls] + [target]
    if quantify == "all":
        chosen = _ordered_props(model, formulas)
    elif quantify == "environment":
        chosen = model.props_with_role("environment")
        if not chosen:
            raise ModelError("no environment-role propositions to quantify over")
    else:
        raise ValueError(f"quantify must be 'all' or 'environment', got {quantify!r}")

    atom_of = model.atom_of
    clauses: list[Clause] = []
    for entry in assumptions:
        clauses += formula_to_clauses(entry.formula, "define", atom_of, f"assumption {entry.slot}")
    for origin, f in controls:
        clauses += formula_to_clauses(f, "define", atom_of, origin)
    clauses += formula_to_clauses(target, "violate", atom_of, target_origin)
    clauses.append(Clause(NO_VIOLATION, naf_body=(VIOLATION,), origin="closure"))
    clauses.append(Clause(SC_HOLDS, (NO_VIOLATION,), origin="closure"))
    return Program(tuple(clauses), tuple(Literal(atom_of(p)) for p in chosen),
                   allow_choice_heads=True)


def compile_to_elp(model: SafetyModel, assumptions: AssumptionSet | None, target_sc: str,
                   quantify: str | None = None, control: str | None = None) -> Program:
    try:
        sc = model.constraint(target_sc)
    except KeyError as exc:
        raise ModelError(exc.args[0]) from None
    if assumptions is None:
        assumptions = model.original_assumptions()
    return compile_formula(model, assumptions, sc.formula, sc.id, quantify, control)
