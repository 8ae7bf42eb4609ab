"""Proposition valuations and robustness margins over simulation traces.

A scenario literal ``(prop, positive)`` uses the bridge predicate of ``prop``
(or its strict reverse comparison when ``positive`` is false).  It holds at
sample k when the comparison held on samples ``k - n .. k``, where
``n = ceil(dwell / dt)``.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from lossprobe.errors import PreconditionError
from lossprobe.falsifier.bridge import Bridge, Predicate
from lossprobe.sim.vehicle import Trace


def dwell_samples(dwell: float, dt: float) -> int:
    return max(0, math.ceil(dwell / dt - 1e-9))


def literal_distance(trace: Trace, pred: Predicate, positive: bool = True) -> np.ndarray:
    """Normalized signed distance; positive exactly where the literal's comparison holds."""
    sig = trace.signal(pred.signal)
    d = (sig - pred.threshold) / pred.scale
    if pred.comparator == "<":
        d = -d
    return d if positive else -d


def _window_min(d: np.ndarray, n: int) -> np.ndarray:
    """``out[k] = min(d[k-n .. k])``; NaN where the window does not fit."""
    out = np.full(len(d), np.nan)
    if n + 1 <= len(d):
        out[n:] = sliding_window_view(d, n + 1).min(axis=1)
    return out


def literal_series(trace: Trace, bridge: Bridge, prop: str, positive: bool = True) -> np.ndarray:
    pred = bridge[prop]
    n = dwell_samples(pred.dwell, trace.dt)
    held = _window_min(literal_distance(trace, pred, positive), n)
    return np.nan_to_num(held, nan=-1.0) > 0


def eval_propositions(trace: Trace, bridge: Bridge, props=None) -> dict[str, np.ndarray]:
    """Boolean series per proposition: comparison held for at least its dwell."""
    props = list(bridge.predicates) if props is None else list(props)
    return {p: literal_series(trace, bridge, p, True) for p in props}


def _literals(scenario):
    lits = getattr(scenario, "literals", scenario)
    lits = [(p, bool(s)) for p, s in lits]
    if not lits:
        raise PreconditionError("scenario has no literals")
    return lits


def satisfaction(trace: Trace, scenario, bridge: Bridge) -> np.ndarray:
    """Per-sample ``min over literals`` of the dwell-window distance (NaN = no full window)."""
    per_lit = []
    for prop, positive in _literals(scenario):
        pred = bridge[prop]
        n = dwell_samples(pred.dwell, trace.dt)
        per_lit.append(_window_min(literal_distance(trace, pred, positive), n))
    return np.min(np.vstack(per_lit), axis=0)


def robustness(trace: Trace, scenario, bridge: Bridge) -> float:
    """Margin; negative exactly when the scenario is realized for a full dwell window."""
    sat = satisfaction(trace, scenario, bridge)
    if np.all(np.isnan(sat)):
        return math.inf
    return float(-np.nanmax(sat))


def realized(trace: Trace, scenario, bridge: Bridge) -> np.ndarray:
    """Samples at which every scenario literal holds (boolean valuation view)."""
    out = np.ones(len(trace), dtype=bool)
    for prop, positive in _literals(scenario):
        out &= literal_series(trace, bridge, prop, positive)
    return out


def hit_window(trace: Trace, scenario, bridge: Bridge) -> tuple[float, float] | None:
    """``[t_start, t_end]`` of the first maximal realizing interval, or None.

    ``t_start`` is the beginning of the dwell that made the first hit.
    """
    mask = realized(trace, scenario, bridge)
    hits = np.flatnonzero(mask)
    if not len(hits):
        return None
    k = int(hits[0])
    end = k
    while end + 1 < len(mask) and mask[end + 1]:
        end += 1
    n = max(dwell_samples(bridge[p].dwell, trace.dt) for p, _ in _literals(scenario))
    return float(trace.t[k - n]), float(trace.t[end])
