"""Command-line front end.

Exit status: 0 success (and, for ``verify``, proved); 1 a refuted, found or
otherwise violating outcome; 2 usage, syntax or model errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from importlib import resources

from lossprobe import __version__
from lossprobe.elp.program import print_program
from lossprobe.errors import LossprobeError, ModelError
from lossprobe.falsifier.bridge import DEFAULT_BRIDGE
from lossprobe.falsifier.search import FOUND, falsify
from lossprobe.falsifier.space import default_space, parse_space
from lossprobe.report import (
    build_report, emit_report, falsification_dict, refine_all, scenario_dict, verdict_dict,
)
from lossprobe.sim.config import default_sim_config, parse_sim_config
from lossprobe.sim.vehicle import simulate
from lossprobe.stpa.compile import compile_to_elp
from lossprobe.stpa.formula import And, Not, Prop, parse_formula, props
from lossprobe.stpa.model import AssumptionSet, SafetyModel, parse_model
from lossprobe.verifier import Status, extract_scenarios, prove_anti, verify, weaken_assumptions

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2
COMMANDS = ("verify", "weaken", "prove-anti", "simulate", "falsify", "report", "compile")


def default_model_path() -> str:
    return str(resources.files("lossprobe") / "data" / "dlcu.stpa")


@dataclass
class RunConfig:
    command: str
    model: str = field(default_factory=default_model_path)
    sc: str = "SC-3"
    assume: list = field(default_factory=list)
    anti: str | None = None
    scenario: str | None = None
    sim_config: str | None = None
    space: str | None = None
    seed: int = 0
    budget: int = 200
    out: str | None = None
    format: str = "text"


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc.strerror}") from None


def _load_model(cfg: RunConfig) -> tuple[SafetyModel, str]:
    text = _read(cfg.model)
    return parse_model(text, cfg.model), text


def _assumptions(model: SafetyModel, overrides) -> AssumptionSet:
    aset = model.original_assumptions()
    for item in overrides:
        slot, sep, text = item.partition("=")
        if not sep:
            raise ModelError(f"--assume expects SLOT=FORMULA, got {item!r}")
        slot = slot.strip()
        if slot not in aset.slots:
            raise ModelError(f"--assume: unknown assumption slot {slot!r} "
                             f"(slots: {', '.join(aset.slots) or 'none'})")
        f = _declared(model, parse_formula(text, source="--assume"), "--assume")
        aset = aset.replace(slot, f, "replaced", "command line")
    return aset


def _declared(model: SafetyModel, f, flag: str):
    known = {d.id for d in model.propositions}
    for p in props(f):
        if p not in known:
            raise ModelError(f"{flag}: undeclared proposition {p}")
    return f


def scenario_literals(text: str, model: SafetyModel) -> list[tuple[str, bool]]:
    """``!WT & MV`` -> ``[("WT", False), ("MV", True)]``."""
    f = parse_formula(text, source="--scenario")
    out = []

    def walk(g):
        if isinstance(g, And):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, Prop):
            out.append((g.name, True))
        elif isinstance(g, Not) and isinstance(g.arg, Prop):
            out.append((g.arg.name, False))
        else:
            raise ModelError(f"--scenario must be a conjunction of literals, got {text!r}")

    walk(f)
    declared = {p.id for p in model.propositions}
    for p, _ in out:
        if p not in declared:
            raise ModelError(f"--scenario: undeclared proposition {p}")
    return out


def _sim(cfg: RunConfig):
    if cfg.sim_config:
        return parse_sim_config(_read(cfg.sim_config), cfg.sim_config)
    return default_sim_config()


def _space(cfg: RunConfig, model: SafetyModel | None):
    if cfg.space:
        space = parse_space(_read(cfg.space), cfg.space)
    elif model is not None and model.space is not None:
        space = model.space
    else:
        space = default_space()
    return space.with_seed(cfg.seed)


def _write(cfg: RunConfig, name: str, text: str):
    if cfg.out is None:
        sys.stdout.write(text)
        return
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, name), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _verdict_text(model, verdict) -> str:
    lines = [f"{verdict.target}: {verdict.status.value.upper()}"]
    for cex in verdict_dict(model, verdict)["counterexamples"]:
        lines.append(f"counterexample: {' & '.join(cex)}")
    lines += verdict.argument_trace
    return "\n".join(lines) + "\n"


def _emit_verdict(cfg, model, verdict, name, scenarios=()):
    if cfg.format == "json":
        _write(cfg, f"{name}.json",
               json.dumps(verdict_dict(model, verdict, scenarios), indent=2, sort_keys=True) + "\n")
    else:
        _write(cfg, f"{name}.txt", _verdict_text(model, verdict))


def _status_code(verdict) -> int:
    if verdict.status is Status.INCONSISTENT:
        print(f"error: inconsistent model: {verdict.argument_trace[0]}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if verdict.proved else EXIT_VIOLATION


def cmd_verify(cfg):
    model, _ = _load_model(cfg)
    verdict = verify(model, _assumptions(model, cfg.assume), cfg.sc)
    _emit_verdict(cfg, model, verdict, "verdict")
    return _status_code(verdict)


def cmd_prove_anti(cfg):
    model, _ = _load_model(cfg)
    if not cfg.anti:
        raise ModelError("prove-anti needs --anti FORMULA")
    anti = _declared(model, parse_formula(cfg.anti, source="--anti"), "--anti")
    verdict = prove_anti(model, anti, _assumptions(model, cfg.assume))
    _emit_verdict(cfg, model, verdict, "anti_verdict")
    if verdict.status is Status.INCONSISTENT:
        return _status_code(verdict)
    # a proved anti-constraint means something bad will happen
    return EXIT_VIOLATION if verdict.proved else EXIT_OK


def cmd_weaken(cfg):
    model, _ = _load_model(cfg)
    model.constraint(cfg.sc)
    results = weaken_assumptions(model, cfg.sc)
    scenarios = extract_scenarios(results, model)
    if cfg.format == "json":
        rows = [{"slot": w.slot, "kind": w.kind.value, "original": str(w.original),
                 "replacement": str(w.replacement), **verdict_dict(model, v)} for w, v in results]
        doc = {"target": cfg.sc, "weakenings": rows,
               "scenarios": [scenario_dict(s) for s in scenarios]}
        _write(cfg, "weakenings.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        lines = [f"weakenings of {cfg.sc}:"]
        if not results:
            lines.append("  (no assumptions to weaken)")
        for w, v in results:
            lines.append(f"  {w.slot:<10} {w.kind.value:<16} {v.status.value:<10} {w.replacement}")
        lines.append("loss scenarios:")
        if not scenarios:
            lines.append("no loss scenarios found")
        for s in scenarios:
            lines.append(f"{s.id} (from {s.source_weakening.label}, hazards {', '.join(s.linked_hazards)})")
            lines.append(f"scenario: {s.text}")
        _write(cfg, "weakenings.txt", "\n".join(lines) + "\n")
    return EXIT_VIOLATION if any(v.refuted for _, v in results) else EXIT_OK


def cmd_simulate(cfg):
    sim = _sim(cfg)
    trace = simulate(sim.params, sim.script, sim.dt)
    _write(cfg, "trace.csv", trace.to_csv())
    return EXIT_OK


def cmd_falsify(cfg):
    model, _ = _load_model(cfg)
    if not cfg.scenario:
        raise ModelError("falsify needs --scenario, e.g. '!WT & MV'")
    lits = scenario_literals(cfg.scenario, model)
    sim = _sim(cfg)
    space = _space(cfg, model)
    bridge = model.bridge or DEFAULT_BRIDGE
    try:
        result = falsify(lits, space, bridge, sim.script, cfg.budget, sim.params, sim.dt)
    except KeyError as exc:
        raise ModelError(exc.args[0]) from None
    if result.status == FOUND:
        result = result.with_boundary(refine_all(result, space))
    doc = falsification_dict(cfg.scenario, result)
    if cfg.format == "json":
        _write(cfg, "falsification.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        lines = [f"scenario: {cfg.scenario}",
                 f"status: {result.status}", f"evaluations: {result.evaluations}"]
        if result.witness:
            w = result.witness
            lines.append("witness: " + ", ".join(f"{k} = {v:.6g}" for k, v in w.values.items()))
            lines.append(f"window: [{w.window[0]:.3f}, {w.window[1]:.3f}] s")
            lines.append(f"margin: {w.margin:.6g}")
        for axis, b in result.boundary.items():
            lines.append(f"boundary {axis}: " + (f"{b['critical']:.6g}" if isinstance(b, dict) else b))
        _write(cfg, "falsification.txt", "\n".join(lines) + "\n")
    if result.witness and cfg.out is not None:
        result.witness.trace.to_csv(os.path.join(cfg.out, "witness_trace.csv"))
    return EXIT_VIOLATION if result.status == FOUND else EXIT_OK


def cmd_report(cfg):
    model, text = _load_model(cfg)
    model.constraint(cfg.sc)
    space = _space(cfg, model)
    report = build_report(model, text, cfg.sc, _sim(cfg), space, cfg.seed, cfg.budget)
    out = emit_report(report, cfg.format, cfg.out)
    if cfg.out is None:
        sys.stdout.write(out)
    target = next(v for v in report.verdicts if v["target"] == cfg.sc)
    if target["status"] == Status.INCONSISTENT.value:
        print("error: model is inconsistent", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if target["status"] == Status.PROVED.value else EXIT_VIOLATION


def cmd_compile(cfg):
    model, _ = _load_model(cfg)
    program = compile_to_elp(model, _assumptions(model, cfg.assume), cfg.sc)
    _write(cfg, "program.elp", print_program(program))
    return EXIT_OK


HANDLERS = {
    "verify": cmd_verify, "weaken": cmd_weaken, "prove-anti": cmd_prove_anti,
    "simulate": cmd_simulate, "falsify": cmd_falsify, "report": cmd_report, "compile": cmd_compile,
}


def run(cfg: RunConfig) -> int:
    if cfg.command not in HANDLERS:
        print(f"error: unknown command {cfg.command!r}", file=sys.stderr)
        return EXIT_ERROR
    if cfg.out is not None:
        try:
            os.makedirs(cfg.out, exist_ok=True)
        except OSError as exc:
            print(f"error: cannot create output directory {cfg.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_ERROR
    try:
        return HANDLERS[cfg.command](cfg)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
    except (LossprobeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default=default_model_path(),
                        help="safety model (.stpa); default: the bundled DLCU model")
    common.add_argument("--sc", default="SC-3", help="target system-level constraint")
    common.add_argument("--assume", action="append", default=[], metavar="SLOT=FORMULA",
                        help="replace an assumption slot (repeatable)")
    common.add_argument("--sim-config", help="vehicle/script config (key = value sections)")
    common.add_argument("--space", help="parameter space file ('path: lo .. hi' lines)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=200, help="simulation evaluations")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lossprobe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="prove a system-level constraint")
    sub.add_parser("weaken", parents=[common], help="weaken each assumption and re-verify")
    p = sub.add_parser("prove-anti", parents=[common], help="prove an anti-constraint")
    p.add_argument("--anti", required=True, metavar="FORMULA", help="e.g. 'MV -> !DL'")
    sub.add_parser("simulate", parents=[common], help="run the simulator and write trace.csv")
    p = sub.add_parser("falsify", parents=[common], help="search for a scenario in simulation")
    p.add_argument("--scenario", required=True, metavar="LITERALS", help="e.g. '!WT & MV'")
    sub.add_parser("report", parents=[common], help="verify, weaken, extract, falsify")
    sub.add_parser("compile", parents=[common], help="print the logic program for --sc")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = RunConfig(
        command=args.command, model=args.model, sc=args.sc, assume=args.assume,
        anti=getattr(args, "anti", None), scenario=getattr(args, "scenario", None),
        sim_config=args.sim_config, space=args.space, seed=args.seed, budget=args.budget,
        out=args.out, format=args.format)
    try:
        return run(cfg)
    except BrokenPipeError:
        # downstream closed the pipe (e.g. `| head`); not an error of ours
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
