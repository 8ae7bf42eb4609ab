"""Search spaces over vehicle parameters, script inputs and initial state."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

from lossprobe.errors import ModelError
from lossprobe.sim.vehicle import ScenarioScript, VehicleParams

MAX_DIMENSION = 16
ALIASES = {
    "mu_override": "script.-1.road_mu_override",
    "brake_torque": "script.brake_torque",
    "drive_torque": "script.drive_torque",
}
_SEGMENT_FIELDS = ("drive_torque", "brake_torque", "road_mu_override")
_RANGE_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*\.\.\s*([-+0-9.eE]+)\s*$")


def resolve(path: str) -> tuple:
    """Split a parameter path into (kind, segment index or None, field).

    Paths: ``params.<field>``, ``script.<field>`` (every segment),
    ``script.<i>.<field>`` (one segment, negative indices allowed),
    ``init.v`` / ``init.omega``, or one of the aliases in ``ALIASES``.
    """
    full = ALIASES.get(path, path)
    parts = full.split(".")
    if parts[0] == "params" and len(parts) == 2 and parts[1] in VehicleParams.field_names():
        return ("params", None, parts[1])
    if parts[0] == "init" and len(parts) == 2 and parts[1] in ("v", "omega"):
        return ("init", None, parts[1])
    if parts[0] == "script":
        if len(parts) == 2 and parts[1] in _SEGMENT_FIELDS:
            return ("script", None, parts[1])
        if len(parts) == 3 and re.fullmatch(r"-?\d+", parts[1]) and parts[2] in _SEGMENT_FIELDS:
            return ("script", int(parts[1]), parts[2])
    raise ValueError(f"unknown parameter path {path!r}")


@dataclass(frozen=True)
class Axis:
    path: str
    lower: float
    upper: float

    def __post_init__(self):
        resolve(self.path)
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError(f"axis {self.path}: bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"axis {self.path}: lower bound must be below upper bound")

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class ParameterSpace:
    axes: tuple[Axis, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValueError("parameter space needs at least one axis")
        if len(self.axes) > MAX_DIMENSION:
            raise ValueError(f"parameter space has {len(self.axes)} axes; limit is {MAX_DIMENSION}")
        names = [a.path for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate axis in parameter space")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def dimension(self) -> int:
        return len(self.axes)

    def index(self, path: str) -> int:
        for i, axis in enumerate(self.axes):
            if axis.path == path or ALIASES.get(axis.path) == ALIASES.get(path, path):
                return i
        raise KeyError(f"axis {path!r} not in parameter space")

    def with_seed(self, seed: int) -> ParameterSpace:
        return replace(self, seed=seed)

    def restrict(self, path: str, lower: float, upper: float) -> ParameterSpace:
        i = self.index(path)
        axes = list(self.axes)
        axes[i] = Axis(axes[i].path, lower, upper)
        return replace(self, axes=tuple(axes))

    def scale(self, unit_point) -> tuple[float, ...]:
        return tuple(a.lower + u * a.width for a, u in zip(self.axes, unit_point))

    def apply(self, values, params: VehicleParams, script: ScenarioScript):
        """Return ``(params, script)`` with the axis values substituted."""
        p_changes, init_changes = {}, {}
        segments = list(script.segments)
        for axis, value in zip(self.axes, values):
            kind, idx, name = resolve(axis.path)
            value = float(value)
            if kind == "params":
                p_changes[name] = value
            elif kind == "init":
                init_changes["v0" if name == "v" else "omega0"] = value
            else:
                targets = range(len(segments)) if idx is None else [idx % len(segments)]
                for i in targets:
                    segments[i] = replace(segments[i], **{name: value})
        params = replace(params, **p_changes) if p_changes else params
        script = replace(script, segments=tuple(segments), **init_changes)
        return params, script

    def to_text(self) -> str:
        lines = [f"seed: {self.seed}"]
        lines += [f"{a.path}: {a.lower:.12g} .. {a.upper:.12g}" for a in self.axes]
        return "\n".join(lines) + "\n"


def parse_space_entries(entries, source: str | None = None, seed: int = 0) -> ParameterSpace:
    """Build a space from ``(key, value, line)`` triples."""
    axes = []
    for key, value, line in entries:
        if key == "seed":
            try:
                seed = int(value)
            except ValueError:
                raise ModelError(f"seed must be an integer, got {value!r}", line,
                                 source=source) from None
            continue
        m = _RANGE_RE.match(value)
        if not m:
            raise ModelError(f"expected 'lower .. upper' for axis {key}, got {value!r}", line,
                             source=source)
        try:
            axes.append(Axis(key, float(m.group(1)), float(m.group(2))))
        except ValueError as exc:
            raise ModelError(str(exc), line, source=source) from None
    try:
        return ParameterSpace(tuple(axes), seed)
    except ValueError as exc:
        raise ModelError(str(exc), source=source) from None


def parse_space(text: str, source: str | None = None) -> ParameterSpace:
    """Parse a standalone space file: ``path: lower .. upper`` lines plus ``seed: N``."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(("%", "#")) or line == "space:":
            continue
        if ":" not in line:
            raise ModelError(f"expected 'key: value', got {line!r}", lineno, source=source)
        key, value = line.split(":", 1)
        entries.append((key.strip(), value.strip(), lineno))
    return parse_space_entries(entries, source)


def default_space(seed: int = 0) -> ParameterSpace:
    return ParameterSpace((Axis("mu_override", 0.1, 1.0), Axis("brake_torque", 500.0, 4000.0)), seed)
