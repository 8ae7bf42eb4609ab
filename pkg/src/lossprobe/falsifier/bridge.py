"""Mapping from abstract propositions to predicates over simulation traces."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from lossprobe.errors import ModelError

SIGNALS = ("v", "omega", "fx_norm", "effective_mu")
UNITS = {"v": "m/s", "omega": "rad/s", "fx_norm": "", "effective_mu": ""}

_PRED_RE = re.compile(
    r"^\s*(?P<signal>[a-z_]+)\s*(?P<cmp>[<>])\s*(?P<thr>[-+0-9.eE]+)\s*(?P<unit>[A-Za-z/]+)?\s*"
    r"(?:,\s*)?(?:dwell\s+(?P<dwell>[0-9.eE+-]+)\s*s?)?\s*$")


@dataclass(frozen=True)
class Predicate:
    """``signal cmp threshold`` that must hold for ``dwell`` seconds.

    Comparisons are strict; the negated literal is the strict reverse
    comparison, so a sample sitting exactly on the threshold satisfies neither.
    """

    signal: str
    comparator: str
    threshold: float
    dwell: float = 0.0

    def __post_init__(self):
        if self.signal not in SIGNALS:
            raise ValueError(f"unknown signal {self.signal!r}; expected one of {', '.join(SIGNALS)}")
        if self.comparator not in ("<", ">"):
            raise ValueError(f"comparator must be '<' or '>', got {self.comparator!r}")
        if self.dwell < 0:
            raise ValueError("dwell must be non-negative")

    @property
    def scale(self) -> float:
        return abs(self.threshold) or 1.0

    def __str__(self):
        unit = UNITS[self.signal]
        unit = f" {unit}" if unit else ""
        return f"{self.signal} {self.comparator} {self.threshold:g}{unit}, dwell {self.dwell:g} s"


@dataclass(frozen=True)
class Bridge:
    predicates: Mapping[str, Predicate]

    def __getitem__(self, prop: str) -> Predicate:
        try:
            return self.predicates[prop]
        except KeyError:
            raise KeyError(f"no bridge predicate for proposition {prop}") from None

    def __contains__(self, prop):
        return prop in self.predicates

    def covers(self, props) -> bool:
        return all(p in self.predicates for p in props)

    def check_dwell(self, dt: float):
        for prop, pred in self.predicates.items():
            if pred.dwell < dt - 1e-12:
                raise ValueError(f"bridge dwell for {prop} ({pred.dwell} s) is shorter than dt ({dt} s)")


def parse_predicate(text: str, line: int | None = None, source: str | None = None) -> Predicate:
    """Parse ``omega > 0.5 rad/s, dwell 0.2 s``."""
    m = _PRED_RE.match(text)
    if not m:
        raise ModelError(f"malformed bridge predicate {text.strip()!r}", line, source=source)
    unit = m.group("unit")
    signal = m.group("signal")
    if signal in UNITS and unit is not None and unit != UNITS[signal]:
        raise ModelError(f"unit {unit!r} does not match signal {signal} ({UNITS[signal] or 'dimensionless'})",
                         line, source=source)
    try:
        return Predicate(signal, m.group("cmp"), float(m.group("thr")),
                         float(m.group("dwell") or 0.0))
    except ValueError as exc:
        raise ModelError(str(exc), line, source=source) from None


#: Default bridge for the DLCU model; thresholds are engineering choices.
DEFAULT_BRIDGE = Bridge({
    "WT": Predicate("omega", ">", 0.5, 0.2),
    "MV": Predicate("v", ">", 0.1, 0.2),
})
