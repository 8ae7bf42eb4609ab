"""Propositional extended logic programs: literals, clauses, the ``.elp`` text format."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from lossprobe.errors import ELPSyntaxError

ATOM_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
RESERVED = frozenset({"not"})


def check_atom(name: str) -> str:
    if not isinstance(name, str) or not ATOM_RE.match(name) or name in RESERVED:
        raise ValueError(f"invalid atom name {name!r}")
    return name


@dataclass(frozen=True, order=True)
class Literal:
    atom: str
    negated: bool = False

    def __post_init__(self):
        check_atom(self.atom)

    def complement(self) -> Literal:
        return Literal(self.atom, not self.negated)

    __neg__ = complement

    def __str__(self):
        return f"-{self.atom}" if self.negated else self.atom

    @classmethod
    def parse(cls, text: str) -> Literal:
        text = text.strip()
        if text.startswith("-"):
            return cls(text[1:].strip(), True)
        return cls(text)


@dataclass(frozen=True)
class Clause:
    head: Literal
    positive_body: tuple[Literal, ...] = ()
    naf_body: tuple[Literal, ...] = ()
    # where the clause came from (model section, assumption slot, ...); ignored by equality
    origin: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "positive_body", tuple(self.positive_body))
        object.__setattr__(self, "naf_body", tuple(self.naf_body))
        both = set(self.positive_body) & set(self.naf_body)
        if both:
            raise ValueError(f"literal {min(both)} appears both positively and under 'not'")

    @property
    def is_fact(self) -> bool:
        return not self.positive_body and not self.naf_body

    def literals(self) -> Iterator[Literal]:
        yield self.head
        yield from self.positive_body
        yield from self.naf_body

    def __str__(self):
        body = [str(l) for l in self.positive_body] + [f"not {l}" for l in self.naf_body]
        if not body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(body)}."


@dataclass(frozen=True)
class Program:
    """An ordered clause list plus free environment choices.

    Each entry of ``choices`` stands for the pair ``{L, -L}``; an answer set
    contains exactly one member of every pair unless the clauses force
    otherwise.
    """

    clauses: tuple[Clause, ...] = ()
    choices: tuple[Literal, ...] = ()
    allow_choice_heads: bool = False

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        seen, choices = set(), []
        for lit in self.choices:
            if lit.atom not in seen:
                seen.add(lit.atom)
                choices.append(Literal(lit.atom))
        object.__setattr__(self, "choices", tuple(choices))
        if not self.allow_choice_heads:
            heads = {c.head.atom for c in self.clauses}
            clash = sorted(heads & seen)
            if clash:
                raise ValueError(
                    f"choice atom(s) {', '.join(clash)} also defined by clauses; "
                    "use #allow_choice_heads to permit this")

    @property
    def atoms(self) -> tuple[str, ...]:
        """Symbol table in first-appearance order (choices first, then clauses)."""
        order = dict.fromkeys(l.atom for l in self.choices)
        for clause in self.clauses:
            for lit in clause.literals():
                order.setdefault(lit.atom)
        return tuple(order)

    @property
    def literal_count(self) -> int:
        return 2 * len(self.atoms)

    def choice_pairs(self) -> Iterator[tuple[Literal, Literal]]:
        for lit in self.choices:
            yield lit, lit.complement()

    def has_naf(self) -> bool:
        return any(c.naf_body for c in self.clauses)

    def extend(self, clauses: Iterable[Clause] = (), choices: Iterable[Literal] = ()) -> Program:
        return Program(self.clauses + tuple(clauses), self.choices + tuple(choices),
                       self.allow_choice_heads)

    def __str__(self):
        return print_program(self)


def print_program(program: Program, comments: bool = True) -> str:
    lines = []
    if program.allow_choice_heads:
        lines.append("#allow_choice_heads.")
    for lit in program.choices:
        lines.append(f"#choice {lit}.")
    origin = None
    for clause in program.clauses:
        if comments and clause.origin and clause.origin != origin:
            lines.append(f"% {clause.origin}")
        origin = clause.origin
        lines.append(str(clause))
    return "\n".join(lines) + ("\n" if lines else "")


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<directive>\#[A-Za-z_]+)
  | (?P<if>:-)
  | (?P<comma>,)
  | (?P<dot>\.)
  | (?P<minus>-)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)


def _tokens(text: str, source: str | None):
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ELPSyntaxError(f"unexpected character {text[pos]!r}", line,
                                 pos - line_start + 1, source)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            yield kind, m.group(), line, m.start() - line_start + 1
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = m.start() + i + 1
        pos = m.end()
    yield "eof", "", line, pos - line_start + 1


class _Parser:
    def __init__(self, text: str, source: str | None):
        self.source = source
        self.toks = list(_tokens(text, source))
        self.i = 0
        self.spelling: dict[str, str] = {}

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str, what: str):
        tok = self.toks[self.i]
        if tok[0] != kind:
            found = tok[1] or "end of input"
            self.error(f"expected {what}, found {found!r}", tok)
        self.i += 1
        return tok

    def error(self, message, tok):
        raise ELPSyntaxError(message, tok[2], tok[3], self.source)

    def literal(self) -> Literal:
        negated = False
        if self.peek()[0] == "minus":
            self.i += 1
            negated = True
        tok = self.take("ident", "atom")
        name = tok[1]
        if not ATOM_RE.match(name) or name in RESERVED:
            self.error(f"invalid atom name {name!r} (must start with a lowercase letter)", tok)
        prev = self.spelling.setdefault(name.lower(), name)
        if prev != name:
            self.error(f"atom {name!r} conflicts with {prev!r} (names differ only in case)", tok)
        return Literal(name, negated)

    def parse(self) -> Program:
        clauses, choices, allow = [], [], False
        while self.peek()[0] != "eof":
            tok = self.peek()
            if tok[0] == "directive":
                self.i += 1
                if tok[1] == "#choice":
                    choices.append(self.literal())
                elif tok[1] == "#allow_choice_heads":
                    allow = True
                else:
                    self.error(f"unknown directive {tok[1]!r}", tok)
                self.take("dot", "'.'")
                continue
            if tok[0] == "if":
                self.error("clause has an empty head", tok)
            head = self.literal()
            pos, naf = [], []
            if self.peek()[0] == "if":
                self.i += 1
                if self.peek()[0] != "dot":
                    while True:
                        t = self.peek()
                        if t[0] == "ident" and t[1] == "not":
                            self.i += 1
                            naf.append(self.literal())
                        else:
                            pos.append(self.literal())
                        if self.peek()[0] != "comma":
                            break
                        self.i += 1
            self.take("dot", "'.' or ','")
            try:
                clauses.append(Clause(head, tuple(pos), tuple(naf)))
            except ValueError as exc:
                self.error(str(exc), tok)
        try:
            return Program(tuple(clauses), tuple(choices), allow)
        except ValueError as exc:
            raise ELPSyntaxError(str(exc), source=self.source) from None


def parse_program(text: str, source: str | None = None) -> Program:
    """Parse ``.elp`` text.

    >>> print(parse_program("p :- q, not -r."))
    p :- q, not -r.
    <BLANKLINE>
    """
    return _Parser(text, source).parse()
