"""STPA artefacts, problem-frame structure and the ``.stpa`` model format.

A model file is a list of sections.  A section header sits in column 0
(``hazards:``); entries are indented ``key: payload`` lines and may carry
more-indented child entries.  Keys take the form ``ID (tag) [REF, REF]``.
Formula payloads may end in ``-- free text``.  Lines starting with ``%``
are comments.  See ``lossprobe/data/dlcu.stpa`` for a complete example.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable

from lossprobe.errors import ModelError
from lossprobe.falsifier.bridge import Bridge, parse_predicate
from lossprobe.falsifier.space import ParameterSpace, parse_space_entries
from lossprobe.stpa.formula import Formula, iff_depth, parse_formula, props

ROLES = ("environment", "plant", "feedback", "actuation", "process_model")
UCA_COLUMNS = ("not_applied", "applied", "wrong_timing", "wrong_duration")
SECTIONS = ("losses", "hazards", "propositions", "constraints", "responsibilities", "actions",
            "control_constraints", "uca", "domains", "phenomena", "bridge", "space", "options")
RESERVED_ATOMS = frozenset({"violation", "sc_holds", "bottom"})
CONTROL_MODES = ("constraints", "logic", "both")
QUANTIFY_MODES = ("all", "environment")

_KEY_RE = re.compile(
    r"^(?P<id>[A-Za-z][\w-]*)\s*(?:\((?P<tag>[\w ]+)\))?\s*(?:\[(?P<refs>[^\]]*)\])?\s*$")
_PHEN_RE = re.compile(r"^(?P<a>[A-Za-z][\w-]*)\s*~\s*(?P<b>[A-Za-z][\w-]*)$")


@dataclass(frozen=True)
class PropositionDecl:
    id: str
    atom: str
    description: str
    role: str


@dataclass(frozen=True)
class Loss:
    id: str
    text: str


@dataclass(frozen=True)
class Hazard:
    id: str
    text: str
    losses: tuple[str, ...]


@dataclass(frozen=True)
class SystemConstraint:
    id: str
    formula: Formula
    hazards: tuple[str, ...]
    text: str = ""


@dataclass(frozen=True)
class Responsibility:
    id: str
    text: str
    constraint: str
    process_model: Formula | None = None
    logic: tuple[Formula, ...] = ()
    feedback: Formula | None = None


@dataclass(frozen=True)
class ControlAction:
    id: str
    text: str
    responsibility: str


@dataclass(frozen=True)
class ControlConstraint:
    id: str
    formula: Formula
    actions: tuple[str, ...]
    text: str = ""


@dataclass(frozen=True)
class UCAEntry:
    hazards: tuple[str, ...] | None   # None means N/A
    text: str = ""

    @property
    def applicable(self) -> bool:
        return self.hazards is not None


@dataclass(frozen=True)
class UCARow:
    action: str
    not_applied: UCAEntry
    applied: UCAEntry
    wrong_timing: UCAEntry
    wrong_duration: UCAEntry


@dataclass(frozen=True)
class Assumption:
    slot: str
    domain: str
    formula: Formula
    note: str = ""


@dataclass(frozen=True)
class Domain:
    id: str
    kind: str
    description: str
    parent: str | None = None
    assumptions: tuple[Assumption, ...] = ()


@dataclass(frozen=True)
class SharedPhenomenon:
    domains: tuple[str, str]
    props: tuple[str, ...]


@dataclass(frozen=True)
class AssumptionEntry:
    slot: str
    domain: str
    formula: Formula
    tag: str = "original"       # original | weakened | replaced
    note: str = ""


@dataclass(frozen=True)
class AssumptionSet:
    """One formula per assumption slot of a model."""

    entries: tuple[AssumptionEntry, ...]

    @property
    def slots(self) -> tuple[str, ...]:
        return tuple(e.slot for e in self.entries)

    def __getitem__(self, slot: str) -> AssumptionEntry:
        for e in self.entries:
            if e.slot == slot:
                return e
        raise KeyError(f"no assumption slot {slot!r}")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def replace(self, slot: str, formula: Formula, tag: str = "replaced", note: str = "") -> AssumptionSet:
        self[slot]
        return AssumptionSet(tuple(
            replace(e, formula=formula, tag=tag, note=note) if e.slot == slot else e
            for e in self.entries))


@dataclass(frozen=True)
class SafetyModel:
    name: str = "model"
    losses: tuple[Loss, ...] = ()
    hazards: tuple[Hazard, ...] = ()
    propositions: tuple[PropositionDecl, ...] = ()
    system_constraints: tuple[SystemConstraint, ...] = ()
    responsibilities: tuple[Responsibility, ...] = ()
    control_actions: tuple[ControlAction, ...] = ()
    control_constraints: tuple[ControlConstraint, ...] = ()
    uca_table: tuple[UCARow, ...] = ()
    domains: tuple[Domain, ...] = ()
    shared_phenomena: tuple[SharedPhenomenon, ...] = ()
    bridge: Bridge | None = None
    space: ParameterSpace | None = None
    control_mode: str = "constraints"
    quantify: str = "all"
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def proposition(self, pid: str) -> PropositionDecl:
        for p in self.propositions:
            if p.id == pid:
                return p
        raise KeyError(f"undeclared proposition {pid}")

    def atom_of(self, pid: str) -> str:
        return self.proposition(pid).atom

    def prop_of_atom(self, atom: str) -> PropositionDecl | None:
        for p in self.propositions:
            if p.atom == atom:
                return p
        return None

    def constraint(self, sc_id: str) -> SystemConstraint:
        for sc in self.system_constraints:
            if sc.id == sc_id:
                return sc
        raise KeyError(f"unknown system-level constraint {sc_id}")

    def props_with_role(self, *roles: str) -> list[str]:
        return [p.id for p in self.propositions if p.role in roles]

    def original_assumptions(self) -> AssumptionSet:
        return AssumptionSet(tuple(AssumptionEntry(a.slot, a.domain, a.formula, "original", a.note)
                                   for d in self.domains for a in d.assumptions))

    def control_formulas(self, mode: str | None = None) -> list[tuple[str, Formula]]:
        """``(origin, formula)`` pairs describing the controller."""
        mode = mode or self.control_mode
        out = []
        if mode in ("constraints", "both"):
            out += [(cc.id, cc.formula) for cc in self.control_constraints]
        if mode in ("logic", "both"):
            out += [(r.id, f) for r in self.responsibilities for f in r.logic]
        return out


# --- text format ------------------------------------------------------------


@dataclass
class _Entry:
    key: str
    payload: str
    line: int
    indent: int
    children: list = field(default_factory=list)


def _split_sections(text: str, source):
    sections: dict[str, list[_Entry]] = {}
    current = None
    stack: list[_Entry] = []
    for lineno, raw in enumerate(text.replace("\r\n", "\n").replace("\r", "\n").split("\n"), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("%"):
            continue
        indent = len(raw) - len(raw.lstrip(" \t"))
        if indent == 0:
            m = re.fullmatch(r"([a-z_]+):", stripped)
            if not m:
                raise ModelError(f"expected a section header like 'hazards:', got {stripped!r}",
                                 lineno, 1, source)
            name = m.group(1)
            if name not in SECTIONS:
                raise ModelError(f"unknown section {name!r}", lineno, 1, source)
            if name in sections:
                raise ModelError(f"duplicate section {name!r}", lineno, 1, source)
            current = sections[name] = []
            stack = []
            continue
        if current is None:
            raise ModelError("entry outside of any section", lineno, indent + 1, source)
        if ":" not in stripped:
            raise ModelError(f"expected 'key: value', got {stripped!r}", lineno, indent + 1, source)
        key, payload = stripped.split(":", 1)
        entry = _Entry(key.strip(), payload.strip(), lineno, indent)
        while stack and stack[-1].indent >= indent:
            stack.pop()
        if stack:
            stack[-1].children.append(entry)
        else:
            current.append(entry)
        stack.append(entry)
    return sections


class _ModelParser:
    def __init__(self, text: str, source: str | None):
        self.source = source
        self.sections = _split_sections(text, source)
        self.ids: dict[str, int] = {}
        self.warnings: list[str] = []

    def fail(self, message, line=None):
        raise ModelError(message, line, source=self.source)

    def key(self, entry: _Entry):
        m = _KEY_RE.match(entry.key)
        if not m:
            self.fail(f"malformed entry key {entry.key!r}", entry.line)
        refs = tuple(r.strip() for r in (m.group("refs") or "").split(",") if r.strip())
        return m.group("id"), (m.group("tag") or "").strip() or None, refs

    def new_id(self, ident, entry):
        if ident in self.ids:
            self.fail(f"duplicate id {ident} (first defined on line {self.ids[ident]})", entry.line)
        self.ids[ident] = entry.line

    def formula(self, text, entry, declared):
        body, _, note = text.partition(" -- ")
        f = parse_formula(body, entry.line, self.source)
        for p in props(f):
            if p not in declared:
                self.fail(f"undeclared proposition {p}", entry.line)
        return f, note.strip()

    def refs_exist(self, refs, pool, what, entry):
        for r in refs:
            if r not in pool:
                self.fail(f"dangling reference: {r} is not a declared {what}", entry.line)

    def no_children(self, entry):
        if entry.children:
            self.fail(f"unexpected nested entry under {entry.key}", entry.children[0].line)

    def parse(self) -> SafetyModel:
        s = self.sections
        losses = []
        for e in s.get("losses", []):
            lid, _, refs = self.key(e)
            self.new_id(lid, e)
            self.no_children(e)
            losses.append(Loss(lid, e.payload))
        loss_ids = {l.id for l in losses}

        hazards = []
        for e in s.get("hazards", []):
            hid, _, refs = self.key(e)
            self.new_id(hid, e)
            self.no_children(e)
            if not refs:
                self.fail(f"hazard {hid} must reference at least one loss", e.line)
            self.refs_exist(refs, loss_ids, "loss", e)
            hazards.append(Hazard(hid, e.payload, refs))
        hazard_ids = {h.id for h in hazards}

        decls = []
        atoms = {}
        for e in s.get("propositions", []):
            pid, role, _ = self.key(e)
            self.no_children(e)
            if not re.fullmatch(r"[A-Z][A-Za-z0-9_]*", pid):
                self.fail(f"proposition id {pid!r} must start with an uppercase letter", e.line)
            if role not in ROLES:
                self.fail(f"proposition {pid} needs a role in parentheses, one of {', '.join(ROLES)}",
                          e.line)
            self.new_id(pid, e)
            atom = pid.lower()
            if atom in RESERVED_ATOMS:
                self.fail(f"proposition {pid} lowers to the reserved atom {atom!r}", e.line)
            if atom in atoms:
                self.fail(f"propositions {atoms[atom]} and {pid} lower to the same atom", e.line)
            atoms[atom] = pid
            decls.append(PropositionDecl(pid, atom, e.payload, role))
        declared = {d.id for d in decls}

        scs = []
        for e in s.get("constraints", []):
            cid, _, refs = self.key(e)
            self.new_id(cid, e)
            self.no_children(e)
            if not refs:
                self.fail(f"system-level constraint {cid} must reference at least one hazard", e.line)
            self.refs_exist(refs, hazard_ids, "hazard", e)
            f, note = self.formula(e.payload, e, declared)
            scs.append(SystemConstraint(cid, f, refs, note))
        sc_ids = {c.id for c in scs}

        resps = []
        for e in s.get("responsibilities", []):
            rid, _, refs = self.key(e)
            self.new_id(rid, e)
            if len(refs) != 1:
                self.fail(f"responsibility {rid} must reference exactly one constraint", e.line)
            self.refs_exist(refs, sc_ids, "system-level constraint", e)
            pm, feedback, logic = None, None, []
            for c in e.children:
                if c.key == "process_model":
                    pm = self.formula(c.payload, c, declared)[0]
                elif c.key == "feedback":
                    feedback = self.formula(c.payload, c, declared)[0]
                elif c.key == "logic":
                    logic.append(self.formula(c.payload, c, declared)[0])
                else:
                    self.fail(f"unknown responsibility attribute {c.key!r}", c.line)
            resps.append(Responsibility(rid, e.payload, refs[0], pm, tuple(logic), feedback))
        resp_ids = {r.id for r in resps}

        actions = []
        for e in s.get("actions", []):
            aid, _, refs = self.key(e)
            self.new_id(aid, e)
            self.no_children(e)
            if len(refs) != 1:
                self.fail(f"control action {aid} must reference exactly one responsibility", e.line)
            self.refs_exist(refs, resp_ids, "responsibility", e)
            actions.append(ControlAction(aid, e.payload, refs[0]))
        action_ids = [a.id for a in actions]

        ccs = []
        for e in s.get("control_constraints", []):
            cid, _, refs = self.key(e)
            self.new_id(cid, e)
            self.no_children(e)
            if not refs:
                self.fail(f"control constraint {cid} must reference at least one control action", e.line)
            self.refs_exist(refs, action_ids, "control action", e)
            f, note = self.formula(e.payload, e, declared)
            ccs.append(ControlConstraint(cid, f, refs, note))

        rows = {}
        for e in s.get("uca", []):
            aid, _, _ = self.key(e)
            self.refs_exist([aid], action_ids, "control action", e)
            if aid in rows:
                self.fail(f"duplicate uca row for {aid}", e.line)
            cells = {}
            for c in e.children:
                col, _, refs = self.key(c)
                if col not in UCA_COLUMNS:
                    self.fail(f"unknown uca column {col!r}; expected one of {', '.join(UCA_COLUMNS)}",
                              c.line)
                if c.payload.strip().upper() == "N/A" and not refs:
                    cells[col] = UCAEntry(None)
                else:
                    if not refs:
                        self.fail(f"uca entry {aid}/{col} must reference hazards or be N/A", c.line)
                    self.refs_exist(refs, hazard_ids, "hazard", c)
                    cells[col] = UCAEntry(refs, c.payload)
            missing = [c for c in UCA_COLUMNS if c not in cells]
            if missing:
                self.fail(f"uca row {aid} is missing column(s) {', '.join(missing)}", e.line)
            rows[aid] = UCARow(aid, **cells)
        if "uca" in s:
            for aid in action_ids:
                if aid not in rows:
                    self.fail(f"uca table has no row for control action {aid}")
        uca = tuple(rows[a] for a in action_ids if a in rows)

        domains = []
        dom_entries = s.get("domains", [])
        dom_ids = set()
        for e in dom_entries:
            did, _, _ = self.key(e)
            self.new_id(did, e)
            dom_ids.add(did)
        for e in dom_entries:
            did, kind, refs = self.key(e)
            if len(refs) > 1:
                self.fail(f"domain {did} may have at most one parent domain", e.line)
            self.refs_exist(refs, dom_ids, "domain", e)
            assume = [c for c in e.children if c.key == "assume"]
            for c in e.children:
                if c.key != "assume":
                    self.fail(f"unknown domain attribute {c.key!r}", c.line)
            assumptions = []
            for i, c in enumerate(assume, 1):
                f, note = self.formula(c.payload, c, declared)
                slot = did if len(assume) == 1 else f"{did}.{i}"
                assumptions.append(Assumption(slot, did, f, note))
            domains.append(Domain(did, kind or "given", e.payload, refs[0] if refs else None,
                                  tuple(assumptions)))

        phenomena = []
        for e in s.get("phenomena", []):
            m = _PHEN_RE.match(e.key)
            if not m:
                self.fail(f"phenomena entries look like 'A ~ B: P, Q', got {e.key!r}", e.line)
            pair = (m.group("a"), m.group("b"))
            self.refs_exist(pair, dom_ids, "domain", e)
            plist = tuple(p.strip() for p in e.payload.split(",") if p.strip())
            for p in plist:
                if p not in declared:
                    self.fail(f"undeclared proposition {p}", e.line)
            phenomena.append(SharedPhenomenon(pair, plist))

        bridge = None
        if "bridge" in s:
            preds = {}
            for e in s["bridge"]:
                if e.key not in declared:
                    self.fail(f"bridge entry for undeclared proposition {e.key}", e.line)
                if e.key in preds:
                    self.fail(f"duplicate bridge entry for {e.key}", e.line)
                preds[e.key] = parse_predicate(e.payload, e.line, self.source)
            bridge = Bridge(preds)

        space = None
        if "space" in s:
            space = parse_space_entries([(e.key, e.payload, e.line) for e in s["space"]], self.source)

        options = {e.key: (e.payload, e.line) for e in s.get("options", [])}
        control_mode, line = options.pop("control", ("constraints", None))
        if control_mode not in CONTROL_MODES:
            self.fail(f"option control must be one of {', '.join(CONTROL_MODES)}", line)
        quantify, line = options.pop("quantify", ("all", None))
        if quantify not in QUANTIFY_MODES:
            self.fail(f"option quantify must be one of {', '.join(QUANTIFY_MODES)}", line)
        name, _ = options.pop("name", ("model", None))
        for key, (_, line) in options.items():
            self.fail(f"unknown option {key!r}", line)

        self.coverage(losses, hazards, scs)
        for f_owner in (*scs, *ccs):
            if iff_depth(f_owner.formula) > 2:
                self.fail(f"{f_owner.id}: nested '<->' deeper than 2 is not supported")

        return SafetyModel(name, tuple(losses), tuple(hazards), tuple(decls), tuple(scs),
                           tuple(resps), tuple(actions), tuple(ccs), uca, tuple(domains),
                           tuple(phenomena), bridge, space, control_mode, quantify,
                           tuple(self.warnings))

    def coverage(self, losses, hazards, scs):
        if not losses:
            self.warnings.append("no-hazard-coverage: model declares no losses")
        for loss in losses:
            if not any(loss.id in h.losses for h in hazards):
                self.warnings.append(f"no-hazard-coverage: loss {loss.id} has no hazard")
        for h in hazards:
            if not any(h.id in sc.hazards for sc in scs):
                self.warnings.append(f"hazard {h.id} is not covered by any system-level constraint")


def parse_model(text: str, source: str | None = None) -> SafetyModel:
    return _ModelParser(text, source).parse()


def load_model(path) -> SafetyModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), str(path))


def traceability_report(model: SafetyModel) -> list[str]:
    """Human-readable trace links loss -> hazard -> SC -> R -> CA -> CC."""
    lines = []
    for loss in model.losses:
        lines.append(f"{loss.id}: {loss.text}")
        for h in model.hazards:
            if loss.id not in h.losses:
                continue
            lines.append(f"  {h.id}: {h.text}")
            for sc in model.system_constraints:
                if h.id not in sc.hazards:
                    continue
                lines.append(f"    {sc.id}: {sc.formula}")
                for r in model.responsibilities:
                    if r.constraint != sc.id:
                        continue
                    lines.append(f"      {r.id}: {r.text}")
                    for a in model.control_actions:
                        if a.responsibility != r.id:
                            continue
                        ccs = [cc.id for cc in model.control_constraints if a.id in cc.actions]
                        lines.append(f"        {a.id}: {a.text} -> {', '.join(ccs) or '(no CC)'}")
    return lines


def summarize(model: SafetyModel) -> dict:
    return {
        "name": model.name,
        "losses": len(model.losses),
        "hazards": len(model.hazards),
        "system_constraints": len(model.system_constraints),
        "responsibilities": len(model.responsibilities),
        "control_actions": len(model.control_actions),
        "control_constraints": len(model.control_constraints),
        "assumptions": len(model.original_assumptions()),
    }


def with_assumptions(entries: Iterable[AssumptionEntry]) -> AssumptionSet:
    return AssumptionSet(tuple(entries))
