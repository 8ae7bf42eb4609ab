"""Combined pipeline report: verdicts, weakenings, scenarios, falsification.

Everything in a ``CombinedReport`` is plain JSON data so that the JSON
document round-trips exactly and two runs with the same seed serialize to
identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass

from lossprobe import __version__
from lossprobe.errors import AxisInsensitiveError
from lossprobe.falsifier.bridge import DEFAULT_BRIDGE, Bridge
from lossprobe.falsifier.search import FOUND, FalsificationResult, boundary_refine, falsify
from lossprobe.falsifier.space import ParameterSpace, default_space
from lossprobe.sim.config import SimConfig, default_sim_config
from lossprobe.stpa.model import SafetyModel, summarize
from lossprobe.verifier import (
    AbstractLossScenario, Verdict, answer_set_texts, extract_scenarios, verify, weaken_assumptions,
)

TOOL = "lossprobe"
SCHEMA = 1


def _num(x: float):
    """JSON-safe float: infinities become strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf" if x < 0 else "nan"
    return x


def verdict_dict(model: SafetyModel, verdict: Verdict, scenarios=()) -> dict:
    return {
        "target": verdict.target,
        "status": verdict.status.value,
        "counterexamples": [answer_set_texts(model, c) for c in verdict.counterexamples],
        "total_counterexamples": verdict.total_counterexamples,
        "answer_sets": verdict.answer_set_count,
        "argument_trace": list(verdict.argument_trace),
        "scenarios": [scenario_dict(s) for s in scenarios],
    }


def scenario_dict(s: AbstractLossScenario) -> dict:
    return {
        "id": s.id,
        "literals": [p if v else f"!{p}" for p, v in s.literals],
        "text": s.text,
        "weakening": s.source_weakening.label if s.source_weakening else None,
        "violated_sc": s.violated_sc,
        "hazards": list(s.linked_hazards),
    }


def falsification_dict(scenario_id: str, r: FalsificationResult) -> dict:
    w = r.witness
    return {
        "scenario": scenario_id,
        "status": r.status,
        "evaluations": r.evaluations,
        "witness": None if w is None else {
            "params": {k: _num(v) for k, v in w.values.items()},
            "window": list(w.window),
            "margin": _num(w.margin),
        },
        "best": {"params": {k: _num(v) for k, v in r.best_values.items()},
                 "margin": _num(r.best_margin)},
        "boundary": r.boundary,
        "log": list(r.log),
    }


@dataclass
class CombinedReport:
    model: dict
    verdicts: list
    weakenings: list
    scenarios: list
    falsifications: list
    provenance: dict
    schema: int = SCHEMA

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> CombinedReport:
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> CombinedReport:
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        m = self.model
        out = [f"model: {m['name']}", ""]
        out.append("losses:")
        out += [f"  {l['id']}: {l['text']}" for l in m["losses"]] or ["  (none)"]
        out.append("hazards:")
        out += [f"  {h['id']} [{', '.join(h['losses'])}]: {h['text']}" for h in m["hazards"]] or ["  (none)"]
        out.append("system-level constraints:")
        out += [f"  {c['id']} [{', '.join(c['hazards'])}]: {c['formula']}" for c in m["constraints"]]
        out.append("assumptions:")
        out += [f"  {a['slot']}: {a['formula']}" for a in m["assumptions"]] or ["  (none)"]
        out += ["", "verdicts:"]
        for v in self.verdicts:
            out.append(f"{v['target']}: {v['status'].upper()}")
            for cex in v["counterexamples"]:
                out.append(f"  counterexample: {' & '.join(cex)}")
        out += ["", "weakenings:"]
        if not self.weakenings:
            out.append("  (no assumptions to weaken)")
        for w in self.weakenings:
            out.append(f"  {w['slot']:<10} {w['kind']:<16} {w['status']:<10} {w['replacement']}")
        out += ["", "loss scenarios:"]
        if not self.scenarios:
            out.append("no loss scenarios found")
        for s in self.scenarios:
            out.append(f"{s['id']} (from {s['weakening']}, violates {s['violated_sc']}, "
                       f"hazards {', '.join(s['hazards'])})")
            out.append(f"scenario: {s['text']}")
        out += ["", "falsification:"]
        if not self.falsifications:
            out.append("  (nothing to falsify)")
        for f in self.falsifications:
            if f["status"] == "skipped":
                out.append(f"{f['scenario']}: skipped ({f['reason']})")
                continue
            out.append(f"{f['scenario']}: {f['status']} after {f['evaluations']} evaluations")
            w = f["witness"]
            if w:
                params = ", ".join(f"{k} = {v:.6g}" for k, v in w["params"].items())
                out.append(f"  witness: {params}; window [{w['window'][0]:.3f}, {w['window'][1]:.3f}] s; "
                           f"margin {w['margin']:.4g}")
            for axis, b in sorted(f["boundary"].items()):
                if isinstance(b, dict):
                    out.append(f"  boundary {axis}: {b['critical']:.6g} "
                               f"(realized at {b['violating']:.6g}, absent at {b['clear']:.6g})")
                else:
                    out.append(f"  boundary {axis}: {b}")
        p = self.provenance
        out += ["", f"provenance: {p['tool']} {p['version']}, seed {p['seed']}, budget {p['budget']}, "
                    f"model sha256 {p['model_sha256'][:16]}"]
        return "\n".join(out) + "\n"


def model_dict(model: SafetyModel) -> dict:
    return {
        "name": model.name,
        "summary": summarize(model),
        "losses": [{"id": l.id, "text": l.text} for l in model.losses],
        "hazards": [{"id": h.id, "text": h.text, "losses": list(h.losses)} for h in model.hazards],
        "constraints": [{"id": c.id, "formula": str(c.formula), "hazards": list(c.hazards)}
                        for c in model.system_constraints],
        "assumptions": [{"slot": a.slot, "domain": a.domain, "formula": str(a.formula)}
                        for a in model.original_assumptions()],
        "warnings": list(model.warnings),
    }


def refine_all(result: FalsificationResult, space: ParameterSpace, steps: int = 100) -> dict:
    out = {}
    for axis in space.axes:
        try:
            b = boundary_refine(result, axis.path, space, axis.width / steps)
            out[axis.path] = {"critical": b.critical, "violating": b.violating, "clear": b.clear}
        except AxisInsensitiveError:
            out[axis.path] = "axis-insensitive"
    return out


def build_report(model: SafetyModel, model_text: str, target_sc: str = "SC-3",
                 sim: SimConfig | None = None, space: ParameterSpace | None = None,
                 seed: int | None = None, budget: int = 200, bridge: Bridge | None = None,
                 falsify_scenarios: bool = True) -> CombinedReport:
    sim = sim or default_sim_config()
    space = space or model.space or default_space()
    if seed is not None:
        space = space.with_seed(seed)
    bridge = bridge or model.bridge or DEFAULT_BRIDGE

    verdicts = [verdict_dict(model, verify(model, None, sc.id)) for sc in model.system_constraints]
    results = weaken_assumptions(model, target_sc) if model.original_assumptions() else []
    weak_rows = [{
        "slot": w.slot, "domain": w.domain, "kind": w.kind.value,
        "original": str(w.original), "replacement": str(w.replacement),
        "status": v.status.value,
        "counterexamples": [answer_set_texts(model, c) for c in v.counterexamples],
    } for w, v in results]
    scenarios = extract_scenarios(results, model)

    falsifications = []
    if falsify_scenarios:
        for s in scenarios:
            if not bridge.covers(p for p, _ in s.literals):
                falsifications.append({"scenario": s.id, "status": "skipped",
                                       "reason": "no bridge predicate for some literal"})
                continue
            r = falsify(s, space, bridge, sim.script, budget, sim.params, sim.dt)
            if r.status == FOUND:
                r = r.with_boundary(refine_all(r, space))
            falsifications.append(falsification_dict(s.id, r))

    provenance = {
        "tool": TOOL,
        "version": __version__,
        "seed": space.seed,
        "budget": budget,
        "target_sc": target_sc,
        "model_sha256": hashlib.sha256(model_text.encode("utf-8")).hexdigest(),
    }
    if os.environ.get("SOURCE_DATE_EPOCH"):
        provenance["source_date_epoch"] = int(os.environ["SOURCE_DATE_EPOCH"])
    return CombinedReport(model_dict(model), verdicts, weak_rows,
                          [scenario_dict(s) for s in scenarios], falsifications, provenance)


def emit_report(report: CombinedReport, fmt: str = "text", out_dir=None) -> str:
    """Render ``report``; with ``out_dir`` also write ``report.<ext>`` there."""
    if fmt not in ("text", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    text = report.to_json() if fmt == "json" else report.to_text()
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        name = "report.json" if fmt == "json" else "report.txt"
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


__all__ = ["CombinedReport", "build_report", "emit_report", "verdict_dict", "scenario_dict",
           "falsification_dict"]
