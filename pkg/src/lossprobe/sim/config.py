"""``key = value`` configuration for vehicle parameters and scenario scripts.

    [vehicle]
    mass = 1500

    [simulation]
    dt = 0.002

    [initial]
    v = 20

    [segment 0]
    start = 0
    end = 1
    brake_torque = 2400

Sections ``segment N`` are ordered by N and must tile ``[0, t_end]``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields

from lossprobe.errors import ModelError
from lossprobe.sim.vehicle import ScenarioScript, Segment, VehicleParams, default_braking_script

DEFAULT_DT = 0.002


@dataclass(frozen=True)
class SimConfig:
    params: VehicleParams
    script: ScenarioScript
    dt: float = DEFAULT_DT


def default_sim_config() -> SimConfig:
    return SimConfig(VehicleParams(), default_braking_script(), DEFAULT_DT)


def _float(section, key, source, default=None):
    raw = section.get(key)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ModelError(f"[{section.name}] {key}: not a number: {raw!r}", source=source) from None


def parse_sim_config(text: str, source: str | None = None) -> SimConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text, source or "<sim config>")
    except configparser.Error as exc:
        raise ModelError(f"cannot parse sim config: {exc}", source=source) from None

    base = default_sim_config()
    values = {}
    if cp.has_section("vehicle"):
        known = {f.name for f in fields(VehicleParams)}
        for key in cp["vehicle"]:
            if key not in known:
                raise ModelError(f"[vehicle] unknown parameter {key!r}", source=source)
            values[key] = _float(cp["vehicle"], key, source)
    try:
        params = VehicleParams(**values)
    except ValueError as exc:
        raise ModelError(str(exc), source=source) from None

    dt = base.dt
    if cp.has_section("simulation"):
        dt = _float(cp["simulation"], "dt", source, base.dt)

    seg_sections = sorted(
        (s for s in cp.sections() if s.startswith("segment")),
        key=lambda s: int(s.split()[1]) if len(s.split()) == 2 and s.split()[1].isdigit() else -1)
    if not seg_sections:
        script = base.script
    else:
        segments = []
        for name in seg_sections:
            sec = cp[name]
            try:
                segments.append(Segment(
                    _float(sec, "start", source), _float(sec, "end", source),
                    _float(sec, "drive_torque", source, 0.0),
                    _float(sec, "brake_torque", source, 0.0),
                    _float(sec, "road_mu_override", source)))
            except (TypeError, ValueError) as exc:
                raise ModelError(f"[{name}] {exc}", source=source) from None
        init = cp["initial"] if cp.has_section("initial") else {}
        v0 = _float(init, "v", source, 0.0) if init else 0.0
        omega0 = _float(init, "omega", source) if init else None
        try:
            script = ScenarioScript(tuple(segments), v0, omega0)
        except ValueError as exc:
            raise ModelError(str(exc), source=source) from None
    return SimConfig(params, script, dt)


def dump_sim_config(config: SimConfig) -> str:
    lines = ["[vehicle]"]
    for f in fields(VehicleParams):
        lines.append(f"{f.name} = {getattr(config.params, f.name):.12g}")
    lines += ["", "[simulation]", f"dt = {config.dt:.12g}", "", "[initial]",
              f"v = {config.script.v0:.12g}"]
    if config.script.omega0 is not None:
        lines.append(f"omega = {config.script.omega0:.12g}")
    for i, seg in enumerate(config.script.segments):
        lines += ["", f"[segment {i}]", f"start = {seg.t_start:.12g}", f"end = {seg.t_end:.12g}",
                  f"drive_torque = {seg.drive_torque:.12g}", f"brake_torque = {seg.brake_torque:.12g}"]
        if seg.road_mu_override is not None:
            lines.append(f"road_mu_override = {seg.road_mu_override:.12g}")
    return "\n".join(lines) + "\n"
