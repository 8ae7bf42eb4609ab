import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lossprobe.errors import AxisInsensitiveError, ModelError, PreconditionError
from lossprobe.falsifier import (
    BUDGET_EXHAUSTED, DEFAULT_BRIDGE, FOUND, NOT_FOUND, Axis, Bridge, FalsificationResult,
    ParameterSpace, Predicate, boundary_refine, eval_propositions, falsify, hit_window,
    parse_predicate, parse_space, realized, robustness,
)
from lossprobe.falsifier.robustness import dwell_samples
from lossprobe.falsifier.search import margin_at
from lossprobe.sim import VehicleParams, default_braking_script, simulate
from lossprobe.sim.vehicle import Trace

SKID = (("WT", False), ("MV", True))
SCRIPT = default_braking_script()
MU_ONLY = ParameterSpace((Axis("mu_override", 0.1, 1.0),))
MU_BRAKE = ParameterSpace((Axis("mu_override", 0.1, 1.0), Axis("brake_torque", 500.0, 4000.0)))


def make_trace(omega, v, dt=0.002):
    omega = np.asarray(omega, dtype=float)
    v = np.broadcast_to(np.asarray(v, dtype=float), omega.shape).copy()
    n = len(omega)
    zeros = np.zeros(n)
    return Trace(dt, np.arange(n) * dt, v, omega, zeros, zeros, np.ones(n), zeros)


@pytest.fixture(scope="module")
def icy():
    return simulate(VehicleParams(), default_braking_script(mu_override=0.3))


@pytest.fixture(scope="module")
def dry():
    return simulate(VehicleParams(), SCRIPT)


@pytest.fixture(scope="module")
def mu_result():
    return falsify(SKID, MU_ONLY, DEFAULT_BRIDGE, SCRIPT, 200)


@pytest.fixture(scope="module")
def grid_result():
    return falsify(SKID, MU_BRAKE, DEFAULT_BRIDGE, SCRIPT, 200)


# --- bridge -----------------------------------------------------------------


def test_parse_predicate():
    p = parse_predicate("omega > 0.5 rad/s, dwell 0.2 s")
    assert p == Predicate("omega", ">", 0.5, 0.2)
    assert str(p) == "omega > 0.5 rad/s, dwell 0.2 s"
    assert parse_predicate("fx_norm < -0.2").scale == 0.2
    assert parse_predicate("effective_mu > 0").scale == 1.0


@pytest.mark.parametrize("text", ["omega >= 0.5", "speed > 1", "v > 1 rad/s", "v > fast"])
def test_bad_predicates(text):
    with pytest.raises(ModelError):
        parse_predicate(text)


def test_dwell_shorter_than_dt_rejected():
    bridge = Bridge({"WT": Predicate("omega", ">", 0.5, 0.001), "MV": DEFAULT_BRIDGE["MV"]})
    with pytest.raises(ValueError, match="dwell"):
        falsify(SKID, MU_ONLY, bridge, SCRIPT, 4)


def test_missing_bridge_entry():
    with pytest.raises(KeyError, match="XX"):
        falsify((("XX", True),), MU_ONLY, DEFAULT_BRIDGE, SCRIPT, 4)


# --- spaces -----------------------------------------------------------------


def test_parse_space_file():
    s = parse_space("seed: 7\nmu_override: 0.1 .. 1.0\nparams.drag_coeff: 0.3 .. 0.5\n")
    assert s.seed == 7 and s.dimension == 2
    assert s.index("script.-1.road_mu_override") == 0
    assert parse_space(s.to_text()) == s


@pytest.mark.parametrize("text", [
    "mu_override: 1.0 .. 0.1", "mu_override: 0.1 .. inf", "params.wings: 0 .. 1",
    "seed: x\nmu_override: 0 .. 1", "mu_override: 0.1", "",
])
def test_bad_spaces(text):
    with pytest.raises(ModelError):
        parse_space(text)


def test_space_dimension_limit():
    axes = [Axis("params.mass", 1000, 2000)] + [Axis(f"script.{i}.brake_torque", 0, 1) for i in range(16)]
    with pytest.raises(ValueError, match="limit"):
        ParameterSpace(tuple(axes))


def test_space_apply():
    params, script = MU_BRAKE.apply((0.3, 1000.0), VehicleParams(), SCRIPT)
    assert [s.road_mu_override for s in script.segments] == [None, 0.3]
    assert [s.brake_torque for s in script.segments] == [1000.0, 1000.0]
    assert params == VehicleParams()


# --- valuations and margins --------------------------------------------------


def test_dwell_delay_semantics():
    bridge = Bridge({"WT": Predicate("omega", ">", 0.5, 0.1)})
    tr = make_trace(np.full(200, 10.0), 0.0)
    wt = eval_propositions(tr, bridge)["WT"]
    first = int(np.argmax(wt))
    assert tr.t[first] == pytest.approx(0.1)
    assert wt[first:].all() and not wt[:first].any()


def test_dwell_samples():
    assert dwell_samples(0.2, 0.002) == 100
    assert dwell_samples(0.0, 0.002) == 0
    assert dwell_samples(0.003, 0.002) == 2


def test_stationary_trace_is_not_moving():
    tr = make_trace(np.zeros(300), 0.0)
    assert not eval_propositions(tr, DEFAULT_BRIDGE)["MV"].any()


def test_lock_trace_realizes_skid(icy):
    window = hit_window(icy, SKID, DEFAULT_BRIDGE)
    assert window is not None and window[1] - window[0] >= 0.2
    k = np.searchsorted(icy.t, window[1] - 1e-9)
    assert icy.v[k] > 0.1 and icy.omega[k] <= 0.5
    assert robustness(icy, SKID, DEFAULT_BRIDGE) < 0


def test_dry_trace_margin_positive(dry):
    assert robustness(dry, SKID, DEFAULT_BRIDGE) > 0
    assert hit_window(dry, SKID, DEFAULT_BRIDGE) is None


def test_fully_locked_margin_sign():
    tr = make_trace(np.zeros(300), 20.0)
    assert robustness(tr, (("WT", False),), DEFAULT_BRIDGE) == pytest.approx(-1.0)
    assert robustness(tr, SKID, DEFAULT_BRIDGE) < 0


def test_short_trace_has_infinite_margin():
    tr = make_trace(np.zeros(20), 20.0)
    assert robustness(tr, SKID, DEFAULT_BRIDGE) == math.inf


def test_empty_scenario_rejected(dry):
    with pytest.raises(PreconditionError):
        robustness(dry, (), DEFAULT_BRIDGE)
    with pytest.raises(PreconditionError):
        falsify((), MU_ONLY, DEFAULT_BRIDGE, SCRIPT, 4)


signal = st.lists(st.sampled_from([0.0, 0.1, 0.4, 0.5, 0.6, 2.0, 10.0]), min_size=1, max_size=12)


@given(signal, signal, st.sampled_from([(False, True), (True, True), (False, False)]),
       st.sampled_from([0.0, 0.004, 0.01]))
@settings(max_examples=400, deadline=None)
def test_margin_agrees_with_valuation(omega_runs, v_runs, signs, dwell):
    # piecewise-constant signals, runs of 3 samples
    omega = np.repeat(omega_runs, 3)
    v = np.resize(np.repeat(v_runs, 3), omega.shape)
    tr = make_trace(omega, v)
    bridge = Bridge({"WT": Predicate("omega", ">", 0.5, dwell), "MV": Predicate("v", ">", 0.1, dwell)})
    scenario = (("WT", signs[0]), ("MV", signs[1]))
    assert (robustness(tr, scenario, bridge) < 0) == bool(realized(tr, scenario, bridge).any())


# --- search -----------------------------------------------------------------


def test_skid_found_in_low_mu(grid_result):
    r = grid_result
    assert r.status == FOUND
    assert r.witness.values["mu_override"] <= 0.5
    assert r.witness.margin < 0 and r.evaluations <= 200
    t0, t1 = r.witness.window
    assert t1 - t0 >= 0.2 - 1e-9


def test_skid_not_found_on_dry_road():
    r = falsify(SKID, MU_ONLY.restrict("mu_override", 0.9, 1.0), DEFAULT_BRIDGE, SCRIPT, 200)
    assert r.status == NOT_FOUND and r.witness is None
    assert r.best_margin > 0 and r.evaluations <= 200


def test_tiny_budget_is_exhausted():
    r = falsify(SKID, MU_ONLY.restrict("mu_override", 0.9, 1.0), DEFAULT_BRIDGE, SCRIPT, 3)
    assert r.status == BUDGET_EXHAUSTED and r.evaluations == 3


@pytest.mark.parametrize("budget", [0, -5])
def test_budget_must_be_positive(budget):
    with pytest.raises(PreconditionError):
        falsify(SKID, MU_ONLY, DEFAULT_BRIDGE, SCRIPT, budget)


def test_reproducible(grid_result):
    again = falsify(SKID, MU_BRAKE, DEFAULT_BRIDGE, SCRIPT, 200)
    assert again == grid_result
    assert again.evaluations == grid_result.evaluations


def test_seed_changes_samples():
    a = falsify(SKID, MU_BRAKE.restrict("mu_override", 0.9, 1.0), DEFAULT_BRIDGE, SCRIPT, 2)
    b = falsify(SKID, MU_BRAKE.restrict("mu_override", 0.9, 1.0).with_seed(1), DEFAULT_BRIDGE, SCRIPT, 2)
    assert a.best_values != b.best_values


def test_thread_count_does_not_change_result(grid_result, monkeypatch):
    assert falsify(SKID, MU_BRAKE, DEFAULT_BRIDGE, SCRIPT, 200, threads=4) == grid_result
    monkeypatch.setenv("LOSSPROBE_THREADS", "3")
    assert falsify(SKID, MU_BRAKE, DEFAULT_BRIDGE, SCRIPT, 200) == grid_result


def test_witness_is_valid(grid_result, mu_result):
    for r in (grid_result, mu_result):
        vals = [r.witness.values[a.path] for a in r.problem.space.axes]
        params, script = r.problem.space.apply(vals, VehicleParams(), SCRIPT)
        assert robustness(simulate(params, script), SKID, DEFAULT_BRIDGE) < 0


def test_found_requires_negative_witness(grid_result):
    with pytest.raises(ValueError):
        FalsificationResult(FOUND, None, 1, {}, 1.0)
    with pytest.raises(ValueError):
        FalsificationResult(NOT_FOUND, grid_result.witness, 1, {}, -1.0)


def test_simulation_abort_is_logged_not_fatal():
    space = ParameterSpace((Axis("params.road_mu", 1.5, 2.5),))
    r = falsify(SKID, space, DEFAULT_BRIDGE, SCRIPT, 6)
    assert r.evaluations == 6
    assert any("aborted" in line and "road_mu" in line for line in r.log)


@given(st.integers(1, 12))
@settings(max_examples=8, deadline=None)
def test_budget_honesty(budget):
    r = falsify(SKID, MU_BRAKE.restrict("mu_override", 0.8, 1.0), DEFAULT_BRIDGE, SCRIPT, budget)
    assert r.evaluations <= budget


# --- boundaries -------------------------------------------------------------


def test_mu_boundary_matches_grid_sweep(mu_result):
    b = boundary_refine(mu_result, "mu_override", tol=0.01)
    assert b.critical <= 0.55
    assert abs(b.clear - b.violating) <= 0.01
    assert margin_at(mu_result, "mu_override", b.violating) < 0
    assert margin_at(mu_result, "mu_override", b.clear) >= 0
    # oracle: first sign change on a 0.005 grid from the witness upwards
    grid = np.arange(0.1, 1.0 + 1e-9, 0.005)
    signs = [margin_at(mu_result, "mu_override", mu) < 0 for mu in grid]
    flips = [i for i in range(len(grid) - 1) if signs[i] != signs[i + 1]]
    assert len(flips) == 1
    crossing = 0.5 * (grid[flips[0]] + grid[flips[0] + 1])
    assert abs(crossing - b.critical) <= 0.01 + 0.0025


def test_two_axis_boundaries_bracket(grid_result):
    for axis in ("mu_override", "brake_torque"):
        width = next(a.width for a in MU_BRAKE.axes if a.path == axis)
        tol = width / 100
        b = boundary_refine(grid_result, axis, tol=tol)
        assert abs(b.clear - b.violating) <= tol
        assert margin_at(grid_result, axis, b.violating) < 0 <= margin_at(grid_result, axis, b.clear)


def test_flat_axis_is_insensitive():
    space = ParameterSpace((Axis("mu_override", 0.1, 1.0), Axis("params.drag_coeff", 0.3, 0.5)))
    r = falsify(SKID, space, DEFAULT_BRIDGE, SCRIPT, 50)
    assert r.status == FOUND
    with pytest.raises(AxisInsensitiveError):
        boundary_refine(r, "params.drag_coeff")


@pytest.mark.parametrize("tol", [0.0, 2.0])
def test_bad_tolerance(mu_result, tol):
    with pytest.raises(PreconditionError):
        boundary_refine(mu_result, "mu_override", tol=tol)


def test_refine_needs_found_result():
    r = falsify(SKID, MU_ONLY.restrict("mu_override", 0.9, 1.0), DEFAULT_BRIDGE, SCRIPT, 3)
    with pytest.raises(PreconditionError):
        boundary_refine(r, "mu_override")
