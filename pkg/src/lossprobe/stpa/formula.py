"""Propositional formulas over STPA propositions.

ASCII syntax, loosest binding first: ``<->``, ``->`` (right associative),
``|``, ``&``, ``!``.  ``true`` and ``false`` are constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Mapping, Union

from lossprobe.errors import ModelError

PROP_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Prop:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Not:
    arg: Formula

    def __str__(self):
        return f"!{_wrap(self.arg, 5)}"


@dataclass(frozen=True)
class And:
    left: Formula
    right: Formula

    def __str__(self):
        return f"{_wrap(self.left, 4)} & {_wrap(self.right, 5)}"


@dataclass(frozen=True)
class Or:
    left: Formula
    right: Formula

    def __str__(self):
        return f"{_wrap(self.left, 3)} | {_wrap(self.right, 4)}"


@dataclass(frozen=True)
class Implies:
    left: Formula
    right: Formula

    def __str__(self):
        return f"{_wrap(self.left, 3)} -> {_wrap(self.right, 2)}"


@dataclass(frozen=True)
class Iff:
    left: Formula
    right: Formula

    def __str__(self):
        return f"{_wrap(self.left, 1)} <-> {_wrap(self.right, 2)}"


Formula = Union[Prop, Const, Not, And, Or, Implies, Iff]

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Prop: 6, Const: 6}


def _wrap(f: Formula, min_prec: int) -> str:
    s = str(f)
    if _PREC[type(f)] < min_prec:
        return f"({s})"
    return s


def props(f: Formula) -> list[str]:
    """Proposition names in first-occurrence order."""
    seen: dict[str, None] = {}

    def walk(g):
        if isinstance(g, Prop):
            seen.setdefault(g.name)
        elif isinstance(g, Not):
            walk(g.arg)
        elif not isinstance(g, Const):
            walk(g.left)
            walk(g.right)

    walk(f)
    return list(seen)


def iff_depth(f: Formula) -> int:
    if isinstance(f, (Prop, Const)):
        return 0
    if isinstance(f, Not):
        return iff_depth(f.arg)
    inner = max(iff_depth(f.left), iff_depth(f.right))
    return inner + 1 if isinstance(f, Iff) else inner


def evaluate(f: Formula, env: Mapping[str, bool]) -> bool:
    if isinstance(f, Prop):
        return env[f.name]
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not evaluate(f.arg, env)
    a, b = evaluate(f.left, env), evaluate(f.right, env)
    if isinstance(f, And):
        return a and b
    if isinstance(f, Or):
        return a or b
    if isinstance(f, Implies):
        return (not a) or b
    return a == b


def assignments(names) -> Iterator[dict[str, bool]]:
    names = list(names)
    for values in product((True, False), repeat=len(names)):
        yield dict(zip(names, values))


def models(f: Formula, names=None) -> list[dict[str, bool]]:
    """Truth-table models of ``f`` over ``names`` (default: its own propositions)."""
    names = props(f) if names is None else list(names)
    return [env for env in assignments(names) if evaluate(f, env)]


def entails_classically(premise: Formula, conclusion: Formula, names=None) -> bool:
    names = names or sorted(set(props(premise)) | set(props(conclusion)))
    return all(evaluate(conclusion, env) for env in assignments(names) if evaluate(premise, env))


def conjoin(formulas) -> Formula:
    formulas = list(formulas)
    if not formulas:
        return Const(True)
    out = formulas[0]
    for f in formulas[1:]:
        out = And(out, f)
    return out


# --- normal forms -----------------------------------------------------------
# A normal-form literal is (name, positive).  CNF: list of disjunctions,
# DNF: list of conjunctions; both as tuples preserving first-seen order.


def _join(left, right):
    out = []
    for a in left:
        for b in right:
            merged = tuple(dict.fromkeys(a + b))
            out.append(merged)
    return out


def _clean(items):
    out = []
    for item in items:
        names = {}
        trivial = False
        for name, sign in item:
            if names.setdefault(name, sign) != sign:
                trivial = True
                break
        if trivial:
            continue
        if item not in out:
            out.append(item)
    return out


def cnf(f: Formula, positive: bool = True) -> list[tuple]:
    """Clauses (disjunctions) equivalent to ``f`` (or to ``!f``), tautologies removed."""
    if isinstance(f, Prop):
        return [((f.name, positive),)]
    if isinstance(f, Const):
        return [] if f.value == positive else [()]
    if isinstance(f, Not):
        return cnf(f.arg, not positive)
    a, b = f.left, f.right
    if isinstance(f, And):
        out = cnf(a, True) + cnf(b, True) if positive else _join(cnf(a, False), cnf(b, False))
    elif isinstance(f, Or):
        out = _join(cnf(a, True), cnf(b, True)) if positive else cnf(a, False) + cnf(b, False)
    elif isinstance(f, Implies):
        out = _join(cnf(a, False), cnf(b, True)) if positive else cnf(a, True) + cnf(b, False)
    elif positive:
        out = _join(cnf(a, False), cnf(b, True)) + _join(cnf(a, True), cnf(b, False))
    else:
        out = _join(cnf(a, True), cnf(b, True)) + _join(cnf(a, False), cnf(b, False))
    return _clean(out)


def dnf(f: Formula, positive: bool = True) -> list[tuple]:
    """Conjunctions equivalent to ``f`` (or to ``!f``), contradictory ones removed."""
    if isinstance(f, Prop):
        return [((f.name, positive),)]
    if isinstance(f, Const):
        return [()] if f.value == positive else []
    if isinstance(f, Not):
        return dnf(f.arg, not positive)
    a, b = f.left, f.right
    if isinstance(f, And):
        out = _join(dnf(a, True), dnf(b, True)) if positive else dnf(a, False) + dnf(b, False)
    elif isinstance(f, Or):
        out = dnf(a, True) + dnf(b, True) if positive else _join(dnf(a, False), dnf(b, False))
    elif isinstance(f, Implies):
        out = dnf(a, False) + dnf(b, True) if positive else _join(dnf(a, True), dnf(b, False))
    elif positive:
        out = _join(dnf(a, True), dnf(b, True)) + _join(dnf(a, False), dnf(b, False))
    else:
        out = _join(dnf(a, True), dnf(b, False)) + _join(dnf(a, False), dnf(b, True))
    return _clean(out)


# --- parsing ----------------------------------------------------------------

_TOK = re.compile(r"\s*(?:(<->)|(->)|([!&|()])|([A-Za-z][A-Za-z0-9_]*))")


class _FormulaParser:
    def __init__(self, text: str, line: int | None, source: str | None):
        self.text, self.line, self.source = text, line, source
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOK.match(text, pos)
            if not m or m.end() == pos:
                self.fail(f"unexpected character {text[pos:].lstrip()[:1]!r}")
            self.toks.append(m.group(m.lastindex))
            pos = m.end()
        self.toks.append(None)
        self.i = 0

    def fail(self, message):
        raise ModelError(f"malformed formula {self.text.strip()!r}: {message}", self.line,
                         source=self.source)

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        if self.peek() is None:
            self.fail("empty formula")
        f = self.iff()
        if self.peek() is not None:
            self.fail(f"unexpected {self.peek()!r}")
        return f

    def iff(self):
        f = self.implies()
        while self.peek() == "<->":
            self.next()
            f = Iff(f, self.implies())
        return f

    def implies(self):
        f = self.disj()
        if self.peek() == "->":
            self.next()
            return Implies(f, self.implies())
        return f

    def disj(self):
        f = self.conj()
        while self.peek() == "|":
            self.next()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek() == "&":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self):
        tok = self.next()
        if tok == "!":
            return Not(self.unary())
        if tok == "(":
            f = self.iff()
            if self.next() != ")":
                self.fail("missing ')'")
            return f
        if tok in ("true", "false"):
            return Const(tok == "true")
        if tok is not None and PROP_RE.match(tok):
            return Prop(tok)
        self.fail("expected a proposition, 'true', 'false', '!' or '('"
                  if tok is None else f"unexpected {tok!r}")


def parse_formula(text: str, line: int | None = None, source: str | None = None) -> Formula:
    return _FormulaParser(text, line, source).parse()
