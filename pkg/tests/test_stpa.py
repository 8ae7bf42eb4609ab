import pytest
from hypothesis import given, settings

from lossprobe.elp import Literal, Program, answer_sets, parse_program, print_program
from lossprobe.errors import ModelError
from lossprobe.stpa import (
    And, Iff, Implies, Not, Or, Prop, compile_to_elp, evaluate, formula_to_clauses, models,
    parse_formula, parse_model, props,
)
from lossprobe.stpa.model import traceability_report
from strategies import formulas

MINIMAL = """\
losses:
  L-1: loss
hazards:
  H-1 [L-1]: hazard
propositions:
  MV (environment): moving
  DL (actuation): locked
constraints:
  SC-1 [H-1]: MV -> DL
"""


def clause_set(text):
    return set(parse_program(text).clauses)


# --- formulas ---------------------------------------------------------------


def test_formula_precedence():
    f = parse_formula("!A & B | C -> D <-> E")
    assert f == Iff(Implies(Or(And(Not(Prop("A")), Prop("B")), Prop("C")), Prop("D")), Prop("E"))


def test_implication_is_right_associative():
    assert parse_formula("A -> B -> C") == Implies(Prop("A"), Implies(Prop("B"), Prop("C")))


@given(formulas())
@settings(max_examples=300, deadline=None)
def test_formula_print_round_trip(f):
    assert parse_formula(str(f)) == f


def test_malformed_formula():
    with pytest.raises(ModelError, match="malformed"):
        parse_formula("MV & ")


# --- lowering ---------------------------------------------------------------


def test_violate_biconditional():
    got = formula_to_clauses(parse_formula("MV <-> DL"), "violate")
    assert set(got) == clause_set("violation :- mv, -dl. violation :- -mv, dl.")


def test_define_biconditional():
    got = formula_to_clauses(parse_formula("WT <-> MV"), "define")
    assert set(got) == clause_set("mv :- wt. wt :- mv. -mv :- -wt. -wt :- -mv.")
    assert len(got) == 4


def test_define_implication_with_negated_consequent():
    got = formula_to_clauses(parse_formula("MV -> !WT"), "define")
    assert got == list(parse_program("-wt :- mv. -mv :- wt.").clauses)


def test_define_plain_implication_with_contrapositive():
    got = formula_to_clauses(parse_formula("A -> B"), "define")
    assert got == list(parse_program("b :- a. -a :- -b.").clauses)


def test_define_contradiction_yields_inconsistent_program():
    cl = formula_to_clauses(parse_formula("A & !A"), "define")
    assert answer_sets(Program(tuple(cl))).inconsistent


def test_nested_biconditional_depth_limit():
    formula_to_clauses(parse_formula("(A <-> B) <-> C"), "define")
    with pytest.raises(ModelError, match="deeper"):
        formula_to_clauses(parse_formula("((A <-> B) <-> C) <-> D"), "define")


def test_unknown_polarity():
    with pytest.raises(ValueError):
        formula_to_clauses(Prop("A"), "assert")


def _choice_program(f, polarity, extra=()):
    names = props(f)
    clauses = formula_to_clauses(f, polarity) + list(extra)
    return names, Program(tuple(clauses), tuple(Literal(n.lower()) for n in names),
                          allow_choice_heads=True)


def _assignment(s, names):
    return {n: Literal(n.lower()) in s for n in names}


@given(formulas())
@settings(max_examples=300, deadline=None)
def test_lowering_soundness(f):
    names, prog = _choice_program(f, "define")
    expected = sorted(tuple(sorted(m.items())) for m in models(f, names))
    result = answer_sets(prog)
    got = sorted(tuple(sorted(_assignment(s, names).items())) for s in result)
    assert got == expected
    for s in result:
        assert all(Literal(n.lower()) in s or Literal(n.lower(), True) in s for n in names)


@given(formulas())
@settings(max_examples=300, deadline=None)
def test_violation_duality(f):
    names, prog = _choice_program(f, "violate")
    result = answer_sets(prog)
    assert len(result) == 2 ** len(names)
    for s in result:
        env = _assignment(s, names)
        assert (Literal("violation") in s) == (not evaluate(f, env))


# --- model parsing ----------------------------------------------------------


def test_dlcu_counts(dlcu):
    assert len(dlcu.losses) == 1
    assert len(dlcu.hazards) == 2
    assert len(dlcu.system_constraints) == 3
    assert len(dlcu.responsibilities) == 2
    assert len(dlcu.control_actions) == 2
    assert len(dlcu.control_constraints) == 3
    assert dlcu.losses[0].text == "loss of life or injury"
    assert dlcu.warnings == ()


def test_dlcu_assumption_slots(dlcu):
    aset = dlcu.original_assumptions()
    assert aset.slots == ("Wheels", "Doors", "Road")
    assert str(aset["Road"].formula) == "WT <-> MV"
    assert {e.tag for e in aset} == {"original"}


def test_dlcu_uca_table(dlcu):
    rows = {r.action: r for r in dlcu.uca_table}
    assert set(rows) == {"CA-1", "CA-2"}
    assert rows["CA-1"].not_applied.hazards == ("H-1",)
    assert not rows["CA-1"].wrong_duration.applicable
    assert rows["CA-2"].applied.hazards == ("H-1",)


def test_dlcu_roles_and_bridge(dlcu):
    assert dlcu.props_with_role("environment") == ["MV"]
    assert dlcu.atom_of("MV_pm") == "mv_pm"
    assert set(dlcu.bridge.predicates) == {"WT", "MV"}
    assert dlcu.space.dimension == 2


def test_traceability_report_mentions_chain(dlcu):
    text = "\n".join(traceability_report(dlcu))
    for ident in ("L-1", "H-1", "SC-1", "R-1", "CA-1", "CC-1"):
        assert ident in text


@pytest.mark.parametrize("patch, message", [
    (("SC-1 [H-1]", "SC-1 [H-9]"), "dangling reference"),
    (("MV -> DL", "MV -> XX"), "undeclared proposition XX"),
    (("H-1 [L-1]: hazard", "H-1 [L-1]: hazard\n  H-1 [L-1]: again"), "duplicate id H-1"),
    (("MV -> DL", "MV -> "), "malformed formula"),
    (("H-1 [L-1]", "H-1"), "at least one loss"),
    (("MV (environment)", "MV (weather)"), "needs a role"),
    (("SC-1 [H-1]", "SC-1"), "at least one hazard"),
])
def test_model_errors(patch, message):
    text = MINIMAL.replace(*patch)
    with pytest.raises(ModelError, match=message) as info:
        parse_model(text, "m.stpa")
    assert info.value.line is not None


def test_empty_losses_warns():
    m = parse_model("losses:\npropositions:\n  MV (environment): moving\n")
    assert any("no-hazard-coverage" in w for w in m.warnings)


def test_reserved_atom_rejected():
    with pytest.raises(ModelError, match="reserved"):
        parse_model("propositions:\n  VIOLATION (plant): x\n")


def test_uca_row_missing_column():
    text = MINIMAL + """\
responsibilities:
  R-1 [SC-1]: lock
actions:
  CA-1 [R-1]: lockDoors
uca:
  CA-1:
    not_applied [H-1]: x
"""
    with pytest.raises(ModelError, match="missing column"):
        parse_model(text)


def test_assumption_set_replace():
    m = parse_model(MINIMAL + "domains:\n  Road (given): r\n    assume: MV\n")
    aset = m.original_assumptions()
    new = aset.replace("Road", parse_formula("!MV"), "weakened", "test")
    assert new["Road"].tag == "weakened" and aset["Road"].tag == "original"
    with pytest.raises(KeyError):
        aset.replace("Nope", parse_formula("MV"))


# --- compilation ------------------------------------------------------------


def test_compile_contains_closure_pair(dlcu):
    text = print_program(compile_to_elp(dlcu, None, "SC-3"))
    assert "-violation :- not violation." in text
    assert "sc_holds :- -violation." in text
    assert "violation :- mv, -dl." in text
    assert "violation :- -mv, dl." in text
    assert "#choice mv." in text


def test_compile_is_deterministic(dlcu, dlcu_text):
    a = print_program(compile_to_elp(dlcu, None, "SC-3"))
    b = print_program(compile_to_elp(parse_model(dlcu_text), None, "SC-3"))
    assert a == b


def test_compiled_program_round_trips(dlcu):
    prog = compile_to_elp(dlcu, None, "SC-3")
    assert parse_program(print_program(prog)) == prog


def test_original_assumptions_prove_sc3(dlcu):
    result = answer_sets(compile_to_elp(dlcu, None, "SC-3"))
    assert result.answer_sets
    assert all(Literal("sc_holds") in s and Literal("violation") not in s for s in result)


def test_weak_road_breaks_proof(dlcu):
    aset = dlcu.original_assumptions().replace("Road", parse_formula("(WT -> MV) & !(MV -> WT)"))
    result = answer_sets(compile_to_elp(dlcu, aset, "SC-3"))
    assert any(Literal("violation") in s for s in result)


def test_unknown_target(dlcu):
    with pytest.raises(ModelError, match="SC-9"):
        compile_to_elp(dlcu, None, "SC-9")


def test_environment_quantification_needs_environment():
    m = parse_model(MINIMAL.replace("(environment)", "(plant)"))
    with pytest.raises(ModelError, match="environment"):
        compile_to_elp(m, None, "SC-1", quantify="environment")


def test_environment_quantification_only_chooses_environment(dlcu):
    prog = compile_to_elp(dlcu, None, "SC-3", quantify="environment")
    assert prog.choices == (Literal("mv"),)
    assert len(answer_sets(prog)) == 2


def test_zero_control_constraints_compiles_but_fails():
    text = MINIMAL.replace("MV -> DL", "MV <-> DL") + "domains:\n  Road (given): r\n    assume: MV | !MV\n"
    m = parse_model(text)
    prog = compile_to_elp(m, None, "SC-1")
    assert any(Literal("violation") in s for s in answer_sets(prog))


def test_control_logic_mode_matches_constraints(dlcu):
    def projected(control):
        res = answer_sets(compile_to_elp(dlcu, None, "SC-3", control=control))
        atoms = ["wt", "dl", "wp", "ds", "mv", "violation"]
        return sorted(sorted(map(str, s.project(atoms))) for s in res)
    assert projected("logic") == projected("constraints") == projected("both")
