import pytest

from lossprobe.elp import Literal
from lossprobe.stpa import parse_formula, parse_model
from lossprobe.stpa.formula import Const, Not, models, props
from lossprobe.verifier import (
    AbstractLossScenario, Kind, Status, Weakening, answer_set_texts, candidate_weakenings,
    check_counterexample, extract_scenarios, prove_anti, verify, weaken_assumptions,
)

WEAK_ROAD = "(WT -> MV) & !(MV -> WT)"


@pytest.fixture(scope="module")
def weakenings(dlcu):
    return weaken_assumptions(dlcu, "SC-3")


def road(dlcu, text):
    return dlcu.original_assumptions().replace("Road", parse_formula(text), "weakened")


def test_original_assumptions_prove_sc3(dlcu):
    v = verify(dlcu, None, "SC-3")
    assert v.status is Status.PROVED
    assert v.counterexamples == () and v.answer_set_count > 0
    assert "sc_holds" in "\n".join(v.argument_trace)


@pytest.mark.parametrize("sc", ["SC-1", "SC-2", "SC-3"])
def test_all_constraints_proved(dlcu, sc):
    assert verify(dlcu, None, sc).proved


def test_weak_road_refutes_with_expected_counterexample(dlcu):
    v = verify(dlcu, road(dlcu, WEAK_ROAD), "SC-3")
    assert v.status is Status.REFUTED
    assert len(v.counterexamples) == 1
    expected = {Literal("mv"), Literal("wt", True), Literal("wp", True),
                Literal("ds", True), Literal("dl", True)}
    assert set(v.counterexamples[0]) == expected
    assert answer_set_texts(dlcu, v.counterexamples[0]) == ["!WT", "!DL", "!WP", "!DS", "MV"]


def test_refutation_trace_follows_the_causal_chain(dlcu):
    trace = verify(dlcu, road(dlcu, WEAK_ROAD), "SC-3").argument_trace
    text = "\n".join(trace)
    assert "violation :- mv, -dl." in text
    for origin in ("[assumption Road]", "[assumption Doors]", "[assumption Wheels]"):
        assert origin in text
    # indentation grows along the chain
    depths = [len(line) - len(line.lstrip()) for line in trace[1:]]
    assert depths == sorted(depths)


def test_dropping_door_assumption_refutes(dlcu):
    aset = dlcu.original_assumptions().replace("Doors", Const(True), "weakened")
    assert verify(dlcu, aset, "SC-3").status is Status.REFUTED


def test_unsatisfiable_assumptions_are_inconsistent(dlcu):
    aset = dlcu.original_assumptions().replace("Road", parse_formula("MV & !MV"))
    v = verify(dlcu, aset, "SC-3")
    assert v.status is Status.INCONSISTENT and not v.counterexamples
    aset = dlcu.original_assumptions().replace("Road", parse_formula("MV & !WT & WT"))
    assert verify(dlcu, aset, "SC-3").status is Status.INCONSISTENT


def test_prove_anti_with_replaced_road(dlcu):
    v = prove_anti(dlcu, parse_formula("MV -> !DL"), road(dlcu, "MV -> !WT"))
    assert v.status is Status.PROVED


def test_prove_anti_with_original_assumptions_refuted(dlcu):
    assert verify(dlcu, None, "SC-3").proved
    assert prove_anti(dlcu, parse_formula("MV -> !DL")).status is Status.REFUTED


@pytest.mark.parametrize("assume", [None, "MV -> !WT", WEAK_ROAD, "true"])
def test_anti_tautology_proved(dlcu, assume):
    aset = None if assume is None else road(dlcu, assume)
    assert prove_anti(dlcu, parse_formula("MV -> MV"), aset).proved


@pytest.mark.parametrize("assume", [None, "MV -> !WT", WEAK_ROAD, "true", "MV -> WT", "WT -> MV"])
@pytest.mark.parametrize("sc", ["SC-1", "SC-2", "SC-3"])
def test_exclusivity(dlcu, assume, sc):
    aset = None if assume is None else road(dlcu, assume)
    f = dlcu.constraint(sc).formula
    both = verify(dlcu, aset, sc).proved and prove_anti(dlcu, Not(f), aset).proved
    assert not both


# --- weakenings -------------------------------------------------------------


def test_negate_backward_is_weak_road():
    ws = {w.kind: w for w in candidate_weakenings("Road", "Road", parse_formula("WT <-> MV"))}
    assert ws[Kind.NEGATE_BACKWARD].replacement == parse_formula(WEAK_ROAD)
    assert [w.kind for w in ws.values()] == list(Kind)


def test_implication_catalogue():
    ws = candidate_weakenings("D", "D", parse_formula("A -> B"))
    assert [w.kind for w in ws] == [Kind.NEGATE_FORWARD, Kind.DROP_ALL]


def test_tautology_has_no_weakening():
    assert candidate_weakenings("D", "D", parse_formula("A | !A")) == []


def test_replacements_weaker_or_incomparable(weakenings):
    for w, _ in weakenings:
        names = sorted(set(props(w.original)) | set(props(w.replacement)))
        orig = {tuple(sorted(m.items())) for m in models(w.original, names)}
        repl = {tuple(sorted(m.items())) for m in models(w.replacement, names)}
        assert orig != repl
        assert not repl < orig


def test_weakening_order(weakenings):
    keys = [(w.slot, list(Kind).index(w.kind)) for w, _ in weakenings]
    assert keys == sorted(keys)
    assert len(weakenings) == 15


def test_every_assumption_has_refuting_weakening(weakenings):
    refuted = {w.slot for w, v in weakenings if v.refuted}
    assert refuted == {"Wheels", "Doors", "Road"}


def test_negate_backward_road_counterexample(weakenings, dlcu):
    [(w, v)] = [(w, v) for w, v in weakenings if w.label == "Road/negate_backward"]
    assert v.refuted
    assert {"!WT", "MV"} <= set(answer_set_texts(dlcu, v.counterexamples[0]))


def test_soundness_cross_check(weakenings, dlcu):
    base = dlcu.original_assumptions()
    for w, v in weakenings:
        aset = base.replace(w.slot, w.replacement)
        for cex in v.counterexamples:
            assert check_counterexample(dlcu, aset, dlcu.constraint("SC-3").formula, cex)


def test_monotonicity_of_weakening(weakenings, dlcu):
    original = verify(dlcu, None, "SC-3")
    for _, v in weakenings:
        if v.proved:
            assert original.proved


def test_no_assumptions_no_weakenings():
    m = parse_model("propositions:\n  MV (environment): m\n  DL (actuation): d\n"
                    "losses:\n  L-1: l\nhazards:\n  H-1 [L-1]: h\nconstraints:\n  SC-1 [H-1]: MV -> DL\n")
    assert weaken_assumptions(m, "SC-1") == []


# --- scenarios --------------------------------------------------------------


def test_road_scenario_and_hazard_link(weakenings, dlcu):
    scenarios = extract_scenarios(weakenings, dlcu)
    by_text = {s.text: s for s in scenarios}
    s = by_text["!WT & MV"]
    assert s.literals == (("WT", False), ("MV", True))
    assert s.linked_hazards == ("H-1",)
    assert s.violated_sc == "SC-3"
    assert s.source_weakening.slot == "Road"


def test_scenarios_are_deduplicated(weakenings, dlcu):
    scenarios = extract_scenarios(weakenings, dlcu)
    texts = [s.text for s in scenarios]
    assert len(texts) == len(set(texts))
    assert [s.id for s in scenarios] == [f"LS-{i}" for i in range(1, len(scenarios) + 1)]
    road_only = [(w, v) for w, v in weakenings if w.label in ("Road/drop_backward", "Road/negate_backward")]
    assert [s.text for s in extract_scenarios(road_only, dlcu)] == ["!WT & MV"]


def test_proved_only_results_give_no_scenarios(weakenings, dlcu):
    v = verify(dlcu, None, "SC-3")
    w = weakenings[0][0]
    assert extract_scenarios([(w, v)], dlcu) == []


def test_scenario_literals_satisfiable(weakenings, dlcu):
    scenarios = extract_scenarios(weakenings, dlcu)
    for s in scenarios:
        v = dict(weakenings)[s.source_weakening]
        wanted = {Literal(dlcu.atom_of(p), not pos) for p, pos in s.literals}
        assert any(wanted <= set(full) for full in v.witnesses)


def test_scenario_formula():
    s = AbstractLossScenario("LS-1", (("WT", False), ("MV", True)), None, "SC-3", ("H-1",))
    assert str(s.formula()) == "!WT & MV"
    assert str(s) == "!WT & MV"


def test_weakening_label():
    w = Weakening("Road", "Road", parse_formula("WT <-> MV"), Const(True), Kind.DROP_ALL)
    assert w.label == "Road/drop_all"
