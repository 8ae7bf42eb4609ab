"""Robustness-guided search for parameter vectors that realize a scenario.

Phase 1 draws scrambled Halton points (seeded) in chunks and stops at the
first chunk containing a hit.  Phase 2 runs coordinate descent on the margin
from the best point, halving the step when no move improves it.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from lossprobe.errors import AxisInsensitiveError, PreconditionError, SimulationError
from lossprobe.falsifier.bridge import Bridge
from lossprobe.falsifier.robustness import _literals, hit_window, robustness
from lossprobe.falsifier.space import ParameterSpace
from lossprobe.sim.vehicle import ScenarioScript, Trace, VehicleParams, simulate

log = logging.getLogger("lossprobe.falsifier")

CHUNK = 8              # phase-1 batch size; fixed so results do not depend on threads
INITIAL_STEP = 0.25    # fraction of the axis width
MIN_STEP = 1.0 / 1024

FOUND = "found"
NOT_FOUND = "not_found"
BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class Problem:
    literals: tuple
    space: ParameterSpace
    bridge: Bridge
    base_script: ScenarioScript
    params: VehicleParams = VehicleParams()
    dt: float = 0.002

    def run(self, values) -> tuple[float, Trace | None, str | None]:
        """Margin, trace and abort message for one parameter vector."""
        try:
            params, script = self.space.apply(values, self.params, self.base_script)
            trace = simulate(params, script, self.dt)
        except (SimulationError, ValueError) as exc:
            return math.inf, None, f"{type(exc).__name__}: {exc}"
        return robustness(trace, self.literals, self.bridge), trace, None


@dataclass(frozen=True)
class Witness:
    values: dict
    margin: float
    window: tuple[float, float]
    trace: Trace = field(repr=False, compare=False)


@dataclass(frozen=True)
class BoundaryResult:
    axis: str
    critical: float
    violating: float     # axis value with margin < 0
    clear: float         # axis value with margin >= 0
    evaluations: int


@dataclass(frozen=True)
class FalsificationResult:
    status: str
    witness: Witness | None
    evaluations: int
    best_values: dict
    best_margin: float
    boundary: dict = field(default_factory=dict)
    log: tuple[str, ...] = ()
    problem: Problem | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if (self.status == FOUND) != (self.witness is not None and self.witness.margin < 0):
            raise ValueError("status 'found' requires a witness with negative margin")

    def with_boundary(self, boundary: dict) -> FalsificationResult:
        return FalsificationResult(self.status, self.witness, self.evaluations, self.best_values,
                                   self.best_margin, dict(boundary), self.log, self.problem)


def thread_count() -> int:
    raw = os.environ.get("LOSSPROBE_THREADS", "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        log.warning("ignoring LOSSPROBE_THREADS=%r", raw)
        return 1


def _as_dict(space: ParameterSpace, values) -> dict:
    return {a.path: float(v) for a, v in zip(space.axes, values)}


def falsify(scenario, space: ParameterSpace, bridge: Bridge, base_script: ScenarioScript,
            budget: int, params: VehicleParams | None = None, dt: float = 0.002,
            threads: int | None = None) -> FalsificationResult:
    if budget < 1:
        raise PreconditionError("budget must be at least 1")
    lits = tuple(_literals(scenario))
    for prop, _ in lits:
        bridge[prop]
    bridge.check_dwell(dt)
    problem = Problem(lits, space, bridge, base_script, params or VehicleParams(), dt)
    threads = thread_count() if threads is None else max(1, threads)
    messages: list[str] = []

    def record(idx, values, result):
        margin, _, err = result
        if err is not None:
            msg = f"candidate {idx} {_as_dict(space, values)} aborted: {err}"
            log.info(msg)
            messages.append(msg)
        return margin

    # phase 1
    n1 = max(1, budget // 2)
    sampler = qmc.Halton(d=space.dimension, scramble=True, seed=np.random.default_rng(space.seed))
    unit = sampler.random(n1)
    evaluations = 0
    best_u, best_m = None, math.inf
    hit = None
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for start in range(0, n1, CHUNK):
            batch = unit[start:start + CHUNK]
            values = [space.scale(u) for u in batch]
            results = list(pool.map(problem.run, values))
            for j, (u, vals, res) in enumerate(zip(batch, values, results)):
                m = record(start + j, vals, res)
                evaluations += 1
                if m < best_m:
                    best_u, best_m = u, m
                    if m < 0 and hit is None:
                        hit = u
            if hit is not None:
                break

    status = None
    if hit is None and best_u is not None:
        # phase 2
        x = np.array(best_u, dtype=float)
        step = INITIAL_STEP
        while evaluations < budget and step >= MIN_STEP and hit is None:
            improved = False
            for i in range(space.dimension):
                for direction in (1.0, -1.0):
                    cand = x.copy()
                    cand[i] = min(1.0, max(0.0, cand[i] + direction * step))
                    if cand[i] == x[i]:
                        continue
                    if evaluations >= budget:
                        break
                    vals = space.scale(cand)
                    m = record(evaluations, vals, problem.run(vals))
                    evaluations += 1
                    if m < best_m:
                        x, best_m, improved = cand, m, True
                        if m < 0:
                            hit = cand
                        break
                if hit is not None or evaluations >= budget:
                    break
            if not improved:
                step /= 2
        best_u = x
        if hit is None:
            status = NOT_FOUND if step < MIN_STEP else BUDGET_EXHAUSTED

    best_values = _as_dict(space, space.scale(best_u)) if best_u is not None else {}
    witness = None
    if hit is not None:
        vals = space.scale(hit)
        margin, trace, _ = problem.run(vals)
        witness = Witness(_as_dict(space, vals), margin, hit_window(trace, lits, bridge), trace)
        status = FOUND
    elif status is None:
        status = BUDGET_EXHAUSTED
    return FalsificationResult(status, witness, evaluations, best_values, best_m,
                               {}, tuple(messages), problem)


def margin_at(result: FalsificationResult, axis: str, value: float) -> float:
    """Margin with ``axis`` set to ``value`` and the other axes at the witness."""
    problem = result.problem
    vals = dict(result.witness.values)
    vals[problem.space.axes[problem.space.index(axis)].path] = float(value)
    return problem.run([vals[a.path] for a in problem.space.axes])[0]


def boundary_refine(result: FalsificationResult, axis: str, space: ParameterSpace | None = None,
                    tol: float = 0.01) -> BoundaryResult:
    """Bisect ``axis`` between the witness and the nearest bound where the scenario is absent."""
    if result.status != FOUND or result.witness is None or result.problem is None:
        raise PreconditionError("boundary_refine needs a 'found' result")
    space = space or result.problem.space
    ax = space.axes[space.index(axis)]
    if not 0 < tol <= ax.width:
        raise PreconditionError(f"tol must lie in (0, {ax.width:g}] for axis {ax.path}")
    w = result.witness.values[result.problem.space.axes[result.problem.space.index(axis)].path]
    evaluations = 0
    clear = None
    for bound in sorted((ax.lower, ax.upper), key=lambda b: (abs(b - w), b)):
        evaluations += 1
        if margin_at(result, axis, bound) >= 0:
            clear = bound
            break
    if clear is None:
        raise AxisInsensitiveError(
            f"axis {ax.path}: scenario realized at both bounds; no sign change")
    bad = w
    while abs(clear - bad) > tol:
        mid = 0.5 * (bad + clear)
        evaluations += 1
        if margin_at(result, axis, mid) < 0:
            bad = mid
        else:
            clear = mid
    return BoundaryResult(ax.path, 0.5 * (bad + clear), bad, clear, evaluations)
