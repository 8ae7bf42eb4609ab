"""Quarter-car longitudinal braking model with wheel slip.

One wheel carries the whole vehicle mass.  Tire force follows a
rise-then-saturate curve in the slip ratio; the brake is a friction device
that can hold a stopped wheel but never drives it backwards.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple

import numpy as np

from lossprobe.errors import PreconditionError, SimulationError

G = 9.81
SLIP_EPS = 0.1  # m/s, floor of the slip-ratio denominator
MAX_SAMPLES = 10_000_000
CSV_HEADER = ("t", "v", "omega", "x", "fx_norm", "effective_mu", "rpm")


@dataclass(frozen=True)
class VehicleParams:
    mass: float = 1500.0            # kg
    wheel_radius: float = 0.33      # m
    wheel_inertia: float = 1.5      # kg m^2
    road_mu: float = 1.0
    tire_mu: float = 1.0
    drag_coeff: float = 0.38        # kg/m, lumped 0.5*rho*Cd*A
    peak_slip: float = 0.15
    gear_ratio: float = 3.5         # engine revolutions per wheel revolution

    def __post_init__(self):
        for name in ("mass", "wheel_radius", "wheel_inertia", "drag_coeff", "gear_ratio"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value}")
        for name in ("road_mu", "tire_mu"):
            value = getattr(self, name)
            if not 0.0 <= value <= 2.0:
                raise ValueError(f"{name} must lie in [0, 2], got {value}")
        if not 0.0 < self.peak_slip <= 1.0:
            raise ValueError(f"peak_slip must lie in (0, 1], got {self.peak_slip}")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class VehicleState:
    t: float = 0.0
    v: float = 0.0          # m/s
    omega: float = 0.0      # rad/s
    x: float = 0.0          # m
    fx_norm: float = 0.0    # longitudinal tire force / (m g)


class Inputs(NamedTuple):
    drive_torque: float
    brake_torque: float
    effective_mu: float


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    drive_torque: float = 0.0
    brake_torque: float = 0.0
    road_mu_override: float | None = None

    def __post_init__(self):
        if self.drive_torque < 0 or self.brake_torque < 0:
            raise ValueError("torques must be non-negative")
        if not self.t_end > self.t_start:
            raise ValueError(f"segment [{self.t_start}, {self.t_end}] is empty")
        if self.road_mu_override is not None and not 0.0 <= self.road_mu_override <= 2.0:
            raise ValueError(f"road_mu_override must lie in [0, 2], got {self.road_mu_override}")


@dataclass(frozen=True)
class ScenarioScript:
    """Piecewise-constant inputs over contiguous segments starting at t = 0.

    ``v0`` is the initial speed; ``omega0`` defaults to free rolling.
    """

    segments: tuple[Segment, ...]
    v0: float = 0.0
    omega0: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise PreconditionError("scenario script has no segments")
        if abs(self.segments[0].t_start) > 1e-12:
            raise PreconditionError("first segment must start at t = 0")
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(a.t_end - b.t_start) > 1e-9:
                raise PreconditionError(
                    f"segments must be contiguous: {a.t_end} then {b.t_start}")
        if self.v0 < 0 or (self.omega0 is not None and self.omega0 < 0):
            raise ValueError("initial speeds must be non-negative")

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end

    def initial_state(self, params: VehicleParams) -> VehicleState:
        omega = self.v0 / params.wheel_radius if self.omega0 is None else self.omega0
        return VehicleState(0.0, self.v0, omega, 0.0, 0.0)


def default_braking_script(brake_torque: float = 2400.0, mu_override: float | None = None,
                           v0: float = 20.0, switch_time: float = 1.0,
                           t_end: float = 3.0) -> ScenarioScript:
    """Constant braking from ``v0``; the road surface may change at ``switch_time``."""
    return ScenarioScript(
        (Segment(0.0, switch_time, brake_torque=brake_torque),
         Segment(switch_time, t_end, brake_torque=brake_torque, road_mu_override=mu_override)),
        v0=v0)


def slip_ratio(v: float, wheel_speed: float) -> float:
    """(omega r - v) / max(v, omega r, eps) for wheel surface speed ``omega r``."""
    return (wheel_speed - v) / max(v, wheel_speed, SLIP_EPS)


def _shape(slip: float, peak: float) -> float:
    s = slip / peak
    return 1.0 if s > 1.0 else (-1.0 if s < -1.0 else s)


def friction_force(slip: float, params: VehicleParams, mu: float | None = None) -> float:
    """Longitudinal tire force in N; ``mu`` replaces ``params.road_mu`` when given."""
    mu = params.road_mu if mu is None else mu
    return mu * params.tire_mu * params.mass * G * _shape(slip, params.peak_slip)


def _wheel_update(omega, v, drive, brake, mu, p: VehicleParams, dt):
    """Backward-Euler wheel speed with set-valued brake torque at standstill.

    Solves I (w - omega) / dt = drive - F(w) r - b, with b = brake for w > 0
    and |b| <= brake at w = 0.  The left side minus the right is increasing
    in w and piecewise linear except on one branch, which is a quadratic.
    """
    r, peak = p.wheel_radius, p.peak_slip
    fmax = mu * p.tire_mu * p.mass * G
    k = p.wheel_inertia / dt

    def g(w):
        lam = (w * r - v) / max(v, w * r, SLIP_EPS)
        return k * (w - omega) - drive + fmax * _shape(lam, peak) * r + brake

    if g(0.0) >= 0.0:   # holding brake absorbs the net torque; no reverse rotation
        return 0.0
    w_hi = omega + dt * (drive + fmax * r) / p.wheel_inertia + 1.0
    cands = {0.0, w_hi, v / r, SLIP_EPS / r,
             (v - peak * max(v, SLIP_EPS)) / r, (v + peak * SLIP_EPS) / r}
    if peak < 1.0:
        cands.add(v / ((1.0 - peak) * r))
    pts = sorted(c for c in cands if 0.0 <= c <= w_hi)
    lo, g_lo = 0.0, g(0.0)
    for hi in pts[1:]:
        g_hi = g(hi)
        if g_hi >= 0.0:
            break
        lo, g_lo = hi, g_hi
    else:  # pragma: no cover - w_hi always brackets the root
        raise SimulationError("wheel solve failed to bracket", -1)
    mid = 0.5 * (lo + hi)
    ws = mid * r
    if fmax > 0 and ws > max(v, SLIP_EPS) and 1.0 - v / ws < peak:
        # F = fmax (1 - v/(w r)) / peak on this branch; multiply through by w
        b = -k * omega - drive + fmax * r / peak + brake
        c = fmax * v / peak
        disc = math.sqrt(b * b + 4.0 * k * c)
        w = 2.0 * c / (b + disc) if b >= 0 else (-b + disc) / (2.0 * k)
    else:
        w = lo - g_lo * (hi - lo) / (g_hi - g_lo)
    return min(max(w, lo), hi)


def step(state: VehicleState, params: VehicleParams, inputs, dt: float) -> VehicleState:
    """Advance one time step of length ``dt``."""
    if not 0.0 < dt <= 0.01:
        raise PreconditionError(f"dt must lie in (0, 0.01] s, got {dt}")
    drive, brake, mu = inputs
    v, omega = state.v, state.omega
    p = params
    w = _wheel_update(omega, v, drive, brake, mu, p, dt)
    force = friction_force(slip_ratio(v, w * p.wheel_radius), p, mu)
    v_new = v + dt * (force - p.drag_coeff * v * v) / p.mass
    if v_new < 0.0:
        v_new = 0.0
    x_new = state.x + dt * v_new
    out = VehicleState(state.t + dt, v_new, w, x_new, force / (p.mass * G))
    if not all(math.isfinite(val) for val in (v_new, w, x_new, out.fx_norm)):
        raise SimulationError(f"non-finite state at t = {out.t:.6g} s", -1)
    return out


@dataclass(frozen=True)
class Trace:
    dt: float
    t: np.ndarray
    v: np.ndarray
    omega: np.ndarray
    x: np.ndarray
    fx_norm: np.ndarray
    effective_mu: np.ndarray
    rpm: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.t)

    @property
    def samples(self) -> list[VehicleState]:
        return [VehicleState(*row) for row in
                zip(self.t.tolist(), self.v.tolist(), self.omega.tolist(),
                    self.x.tolist(), self.fx_norm.tolist())]

    def signal(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def window(self, start: int, stop: int) -> Trace:
        cols = {name: getattr(self, name)[start:stop] for name in CSV_HEADER}
        return Trace(self.dt, **cols)

    def to_csv(self, fh=None) -> str | None:
        """Write the CSV export to ``fh`` (a path or text stream) or return it."""
        buf = io.StringIO() if fh is None else None
        out = buf
        close = False
        if fh is not None and not hasattr(fh, "write"):
            out = open(fh, "w", newline="", encoding="utf-8")
            close = True
        elif fh is not None:
            out = fh
        try:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            cols = [getattr(self, name).tolist() for name in CSV_HEADER]
            for row in zip(*cols):
                writer.writerow([f"{val:.12g}" for val in row])
        finally:
            if close:
                out.close()
        return buf.getvalue() if buf is not None else None

    @classmethod
    def from_csv(cls, text: str) -> Trace:
        rows = list(csv.reader(io.StringIO(text)))
        if tuple(rows[0]) != CSV_HEADER:
            raise ValueError(f"unexpected trace header {rows[0]}")
        data = np.array([[float(x) for x in row] for row in rows[1:]])
        cols = {name: data[:, i] for i, name in enumerate(CSV_HEADER)}
        dt = float(cols["t"][1] - cols["t"][0]) if len(data) > 1 else 0.0
        return cls(dt, **cols)


def simulate(params: VehicleParams, script: ScenarioScript, dt: float = 0.002,
             t_end: float | None = None) -> Trace:
    """Integrate ``script`` from t = 0 to ``t_end`` (default: end of the script)."""
    t_end = script.t_end if t_end is None else t_end
    if t_end > script.t_end + 1e-9:
        raise PreconditionError(f"t_end {t_end} exceeds the script end {script.t_end}")
    if not 0.0 < dt <= 0.01:
        raise PreconditionError(f"dt must lie in (0, 0.01] s, got {dt}")
    n = int(round(t_end / dt))
    if n < 1:
        raise PreconditionError("simulation horizon shorter than one step")
    if n + 1 > MAX_SAMPLES:
        raise PreconditionError(f"{n + 1} samples exceed the limit of {MAX_SAMPLES}")

    segs = script.segments
    t = np.arange(n + 1) * dt
    v = np.empty(n + 1)
    omega = np.empty(n + 1)
    x = np.empty(n + 1)
    fx = np.empty(n + 1)
    mu_log = np.empty(n + 1)

    state = script.initial_state(params)
    seg_i = 0

    def inputs_at(time):
        nonlocal seg_i
        while seg_i + 1 < len(segs) and time >= segs[seg_i].t_end - 1e-9:
            seg_i += 1
        seg = segs[seg_i]
        mu = params.road_mu if seg.road_mu_override is None else seg.road_mu_override
        return Inputs(seg.drive_torque, seg.brake_torque, mu)

    inp = inputs_at(0.0)
    v[0], omega[0], x[0], mu_log[0] = state.v, state.omega, state.x, inp.effective_mu
    slip0 = slip_ratio(state.v, state.omega * params.wheel_radius)
    fx[0] = friction_force(slip0, params, inp.effective_mu) / (params.mass * G)
    for k in range(n):
        inp = inputs_at(t[k])
        try:
            state = step(state, params, inp, dt)
        except SimulationError:
            raise SimulationError(f"non-finite state at t = {t[k + 1]:.6g} s", k) from None
        v[k + 1], omega[k + 1], x[k + 1], fx[k + 1] = state.v, state.omega, state.x, state.fx_norm
        mu_log[k + 1] = inputs_at(t[k + 1]).effective_mu
    rpm = omega * params.gear_ratio * (60.0 / (2.0 * math.pi))
    return Trace(dt, t, v, omega, x, fx, mu_log, rpm)


def kinetic_energy(params: VehicleParams, v, omega):
    return 0.5 * params.mass * np.asarray(v) ** 2 + 0.5 * params.wheel_inertia * np.asarray(omega) ** 2


def with_param(params: VehicleParams, **changes) -> VehicleParams:
    return replace(params, **changes)
