"""Axiom language: AST, parsers for axiom/program/trace files, printers.

Axiom files::

    stages: Fet, Dec, Exe, Com
    pred DepOn(a, b) := dst(a) == src1(b) \\/ dst(a) == src2(b)
    pred IsStore/1 extern
    axiom "ax1": forall i1, i2. (i1 <r i2 /\\ DepOn(i1, i2)) => hb(i1.Exe, i2.Exe)

Connectives bind ``~`` tightest, then ``/\\``, ``\\/`` and finally ``=>``
(right associative).  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from .core import (Arith, Cmp, Cond, CoreRef, Event, Instruction, Interpretation,
                   LabelRef, Lit, MetaRef, OperationDomain, PAnd, PImplies, PNot, POr,
                   PredicateDef, Program, StageSet, Term)
from .errors import ConfigError, UspecSyntaxError

# -- formula AST --------------------------------------------------------------


@dataclass(frozen=True)
class Hb:
    v1: str
    s1: str
    v2: str
    s2: str


@dataclass(frozen=True)
class RefOrder:
    v1: str
    v2: str


@dataclass(frozen=True)
class PredAtom:
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


Formula = Union[Hb, RefOrder, PredAtom, Not, And, Or, Implies]
Atom = Union[Hb, RefOrder, PredAtom]

FORALL = "forall"
EXISTS = "exists"


def atoms(f: Formula) -> Iterator[Atom]:
    """Atoms in left-to-right order (with repeats)."""
    if isinstance(f, (Hb, RefOrder, PredAtom)):
        yield f
    elif isinstance(f, Not):
        yield from atoms(f.arg)
    else:
        yield from atoms(f.left)
        yield from atoms(f.right)


def atom_vars(a: Atom) -> tuple[str, ...]:
    if isinstance(a, Hb):
        return (a.v1, a.v2)
    if isinstance(a, RefOrder):
        return (a.v1, a.v2)
    return a.args


@dataclass(frozen=True)
class Axiom:
    name: str
    quantifiers: tuple[tuple[str, str], ...]
    matrix: Formula

    def __post_init__(self):
        names = [v for _, v in self.quantifiers]
        if not names:
            raise ConfigError(f"axiom {self.name!r} has no quantified variables")
        if len(set(names)) != len(names):
            raise ConfigError(f"axiom {self.name!r} quantifies a variable twice")
        for a in atoms(self.matrix):
            for v in atom_vars(a):
                if v not in names:
                    raise ConfigError(f"axiom {self.name!r}: unbound variable {v!r}")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.quantifiers)

    @property
    def arity(self) -> int:
        return len(self.quantifiers)

    @property
    def universal(self) -> bool:
        return all(q == FORALL for q, _ in self.quantifiers)

    @property
    def predicate_free(self) -> bool:
        return not any(isinstance(a, PredAtom) for a in atoms(self.matrix))

    def context_atoms(self) -> tuple[Atom, ...]:
        """Distinct non-hb atoms in order of first occurrence."""
        seen = []
        for a in atoms(self.matrix):
            if not isinstance(a, Hb) and a not in seen:
                seen.append(a)
        return tuple(seen)

    def hb_atoms(self) -> tuple[Hb, ...]:
        seen = []
        for a in atoms(self.matrix):
            if isinstance(a, Hb) and a not in seen:
                seen.append(a)
        return tuple(seen)


def classify(ax: Axiom) -> dict:
    return {"name": ax.name, "universal": ax.universal,
            "predicate_free": ax.predicate_free, "arity": ax.arity}


@dataclass(frozen=True)
class AxiomSet:
    stages: StageSet
    predicates: tuple[PredicateDef, ...]
    axioms: tuple[Axiom, ...]

    def __post_init__(self):
        names = [p.name for p in self.predicates]
        if len(set(names)) != len(names):
            raise ConfigError("predicate declared twice")
        anames = [a.name for a in self.axioms]
        if len(set(anames)) != len(anames):
            raise ConfigError("axiom name used twice")
        preds = self.predicate_map()
        for ax in self.axioms:
            for a in atoms(ax.matrix):
                if isinstance(a, Hb):
                    for st in (a.s1, a.s2):
                        if st not in self.stages:
                            raise ConfigError(f"axiom {ax.name!r}: unknown stage {st!r}")
                elif isinstance(a, PredAtom):
                    if a.name not in preds:
                        raise ConfigError(f"axiom {ax.name!r}: unknown predicate {a.name!r}")
                    if preds[a.name].arity != len(a.args):
                        raise ConfigError(f"axiom {ax.name!r}: {a.name} expects "
                                          f"{preds[a.name].arity} arguments")

    def predicate_map(self) -> dict[str, PredicateDef]:
        return {p.name: p for p in self.predicates}

    @property
    def universal(self) -> bool:
        return all(a.universal for a in self.axioms)

    @property
    def max_arity(self) -> int:
        return max((a.arity for a in self.axioms), default=0)

    def axiom(self, name: str) -> Axiom:
        for a in self.axioms:
            if a.name == name:
                return a
        raise ConfigError(f"no axiom named {name!r}")

    def restrict(self, names: Sequence[str]) -> "AxiomSet":
        return AxiomSet(self.stages, self.predicates, tuple(self.axiom(n) for n in names))


def bind(axiom_set: AxiomSet, program: Program) -> AxiomSet:
    """Resolve extern predicates against the program's tables and check keys/stages."""
    if program.stages is not None and tuple(program.stages) != axiom_set.stages.names:
        raise ConfigError(f"program stages {', '.join(program.stages)} differ from "
                          f"axiom stages {', '.join(axiom_set.stages.names)}")
    tables = dict(program.tables)
    decl = axiom_set.predicate_map()
    for name in tables:
        if name in decl and not decl[name].extern:
            raise ConfigError(f"table {name!r} clashes with a defined predicate")
    keys = set(program.domain.keys)
    out = []
    for p in axiom_set.predicates:
        if p.extern:
            if p.name not in tables:
                raise ConfigError(f"extern predicate {p.name!r} has no table")
            out.append(PredicateDef(p.name, p.arity, table=tables[p.name]))
        else:
            if program.domain.ops:
                missing = p.metadata_keys() - keys
                if missing:
                    raise ConfigError(f"predicate {p.name}: unknown metadata key "
                                      f"{sorted(missing)[0]!r}")
            out.append(p)
    return AxiomSet(axiom_set.stages, tuple(out), axiom_set.axioms)


def interpretation(axiom_set: AxiomSet, program: Program) -> Interpretation:
    return Interpretation(axiom_set.predicate_map(), program.domain)


# -- lexer --------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>/\\|\\/|=>|<r(?![A-Za-z0-9_])|<_r|:=|==|!=|<=|>=|&&|\|\||[~!<>+\-(){},.:=/]
        |∀|∃|∧|∨|¬|⇒|→)
""", re.VERBOSE)

_OP_ALIAS = {"∧": "/\\", "&&": "/\\", "∨": "\\/", "||": "\\/", "¬": "~", "!": "~",
             "⇒": "=>", "→": "=>", "<_r": "<r", "∀": "forall", "∃": "exists"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, string, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str, source: str = "<input>") -> list[Token]:
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise UspecSyntaxError(f"unexpected character {text[pos]!r}", line, col, source)
        kind = m.lastgroup
        s = m.group()
        if kind not in ("ws", "comment"):
            if kind == "op":
                s = _OP_ALIAS.get(s, s)
                if s in ("forall", "exists"):
                    kind = "ident"
            elif kind == "string":
                s = s[1:-1]
            toks.append(Token(kind, s, line, col))
        nl = m.group().count("\n")
        if nl:
            line += nl
            col = len(m.group()) - m.group().rfind("\n")
        else:
            col += len(m.group())
        pos = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


class _Parser:
    KEYWORDS_USPEC = {"stages", "pred", "axiom"}

    def __init__(self, text: str, source: str):
        self.toks = tokenize(text, source)
        self.i = 0
        self.source = source

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise UspecSyntaxError(f"{msg} (found {found})", tok.line, tok.col, self.source)

    def at(self, text: str, kind: str = "op") -> bool:
        return self.tok.kind == kind and self.tok.text == text

    def at_ident(self, text: str) -> bool:
        return self.at(text, "ident")

    def expect(self, text: str, kind: str = "op") -> Token:
        if not self.at(text, kind):
            self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "ident":
            self.error(f"expected {what}")
        t = self.tok
        self.i += 1
        return t.text

    def integer(self) -> int:
        neg = False
        if self.at("-"):
            neg = True
            self.i += 1
        if self.tok.kind != "int":
            self.error("expected integer")
        v = int(self.tok.text)
        self.i += 1
        return -v if neg else v

    # -- axiom files

    def axiom_file(self) -> AxiomSet:
        stages = None
        preds, axioms = [], []
        while self.tok.kind != "eof":
            if self.at_ident("stages"):
                if stages is not None:
                    self.error("duplicate stages header")
                self.i += 1
                self.expect(":")
                names = [self.ident("stage name")]
                while self.at(","):
                    self.i += 1
                    names.append(self.ident("stage name"))
                stages = StageSet(tuple(names))
            elif self.at_ident("pred"):
                preds.append(self.pred_decl())
            elif self.at_ident("axiom"):
                axioms.append(self.axiom_decl())
            else:
                self.error("expected 'stages', 'pred' or 'axiom'")
        if stages is None:
            raise UspecSyntaxError("missing 'stages:' header", 1, 1, self.source)
        return AxiomSet(stages, tuple(preds), tuple(axioms))

    def pred_decl(self) -> PredicateDef:
        start = self.expect("pred", "ident")
        name = self.ident("predicate name")
        if self.at("/"):
            self.i += 1
            arity = self.integer()
            self.expect("extern", "ident")
            return PredicateDef(name, arity)
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.ident("parameter"))
            while self.at(","):
                self.i += 1
                params.append(self.ident("parameter"))
        self.expect(")")
        self.expect(":=")
        expr = self.cond_impl()
        try:
            return PredicateDef(name, len(params), tuple(params), expr=expr)
        except ConfigError as e:
            raise UspecSyntaxError(str(e), start.line, start.col, self.source) from None

    def axiom_decl(self) -> Axiom:
        start = self.expect("axiom", "ident")
        if self.tok.kind != "string":
            self.error("expected quoted axiom name")
        name = self.tok.text
        self.i += 1
        self.expect(":")
        quants = self.prefix()
        matrix = self.implication()
        try:
            return Axiom(name, quants, matrix)
        except ConfigError as e:
            raise UspecSyntaxError(str(e), start.line, start.col, self.source) from None

    def quantifier_kw(self) -> Optional[str]:
        if self.at_ident("forall") or self.at_ident("fall"):
            return FORALL
        if self.at_ident("exists"):
            return EXISTS
        return None

    def prefix(self) -> tuple[tuple[str, str], ...]:
        kind = self.quantifier_kw()
        if kind is None:
            self.error("expected quantifier")
        out = []
        while True:
            self.i += 1
            out.append((kind, self.ident("variable")))
            while self.at(","):
                self.i += 1
                k = self.quantifier_kw()
                if k is not None:
                    kind = k
                    self.i += 1
                out.append((kind, self.ident("variable")))
            self.expect(".")
            kind = self.quantifier_kw()
            if kind is None:
                return tuple(out)

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.at("=>"):
            self.i += 1
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.at("\\/"):
            self.i += 1
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.at("/\\"):
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.at("~"):
            self.i += 1
            return Not(self.unary())
        if self.at("("):
            self.i += 1
            f = self.implication()
            self.expect(")")
            return f
        if self.quantifier_kw() is not None:
            self.error("quantifiers must form a prenex prefix")
        if self.at_ident("hb") and self.peek().kind == "op" and self.peek().text == "(":
            self.i += 2
            v1 = self.ident("variable")
            self.expect(".")
            s1 = self.ident("stage")
            self.expect(",")
            v2 = self.ident("variable")
            self.expect(".")
            s2 = self.ident("stage")
            self.expect(")")
            return Hb(v1, s1, v2, s2)
        name = self.ident("atom")
        if self.at("<r"):
            self.i += 1
            return RefOrder(name, self.ident("variable"))
        if self.at("("):
            self.i += 1
            args = []
            if not self.at(")"):
                args.append(self.ident("variable"))
                while self.at(","):
                    self.i += 1
                    args.append(self.ident("variable"))
            self.expect(")")
            return PredAtom(name, tuple(args))
        self.error("expected '<r' or '(' after identifier")

    # -- predicate bodies

    def cond_impl(self) -> Cond:
        left = self.cond_or()
        if self.at("=>"):
            self.i += 1
            return PImplies(left, self.cond_impl())
        return left

    def cond_or(self) -> Cond:
        f = self.cond_and()
        while self.at("\\/"):
            self.i += 1
            f = POr(f, self.cond_and())
        return f

    def cond_and(self) -> Cond:
        f = self.cond_unary()
        while self.at("/\\"):
            self.i += 1
            f = PAnd(f, self.cond_unary())
        return f

    def cond_unary(self) -> Cond:
        if self.at("~"):
            self.i += 1
            return PNot(self.cond_unary())
        if self.at("("):
            self.i += 1
            f = self.cond_impl()
            self.expect(")")
            return f
        left = self.term()
        if self.tok.kind == "op" and self.tok.text in ("==", "!=", "<", "<=", ">", ">="):
            op = self.tok.text
            self.i += 1
            return Cmp(op, left, self.term())
        self.error("expected comparison operator")

    def term(self) -> Term:
        t = self.primary()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            t = Arith(op, t, self.primary())
        return t

    def primary(self) -> Term:
        if self.tok.kind == "int" or self.at("-"):
            return Lit(self.integer())
        if self.tok.kind == "string":
            v = self.tok.text
            self.i += 1
            return Lit(v)
        name = self.ident("term")
        if self.at("("):
            self.i += 1
            var = self.ident("variable")
            self.expect(")")
            if name == "core":
                return CoreRef(var)
            if name == "label":
                return LabelRef(var)
            return MetaRef(name, var)
        return Lit(name)

    # -- program files

    PROGRAM_KEYWORDS = {"cores", "stages", "op", "core", "table"}

    def value(self):
        if self.tok.kind == "int" or self.at("-"):
            return self.integer()
        if self.tok.kind in ("ident", "string"):
            v = self.tok.text
            self.i += 1
            return v
        self.error("expected metadata value")

    def program_file(self) -> Program:
        cores = None
        stages = None
        ops: dict[str, dict] = {}
        streams: dict[int, tuple[str, ...]] = {}
        stream_toks: list[tuple[Token, str]] = []
        tables: dict[str, frozenset] = {}
        while self.tok.kind != "eof":
            t = self.tok
            if self.at_ident("cores"):
                self.i += 1
                self.expect(":")
                cores = self.integer()
                if cores < 1:
                    raise UspecSyntaxError("program must have at least one core",
                                           t.line, t.col, self.source)
            elif self.at_ident("stages"):
                self.i += 1
                self.expect(":")
                names = [self.ident("stage name")]
                while self.at(","):
                    self.i += 1
                    names.append(self.ident("stage name"))
                stages = tuple(names)
            elif self.at_ident("op"):
                self.i += 1
                name_tok = self.tok
                name = self.ident("operation name")
                if name in self.PROGRAM_KEYWORDS:
                    self.error("operation name is a keyword", name_tok)
                if name in ops:
                    self.error(f"operation {name!r} declared twice", name_tok)
                md = {}
                if self.at("{"):
                    self.i += 1
                    while not self.at("}"):
                        key = self.ident("metadata key")
                        self.expect("=")
                        if key in md:
                            self.error(f"duplicate key {key!r}")
                        md[key] = self.value()
                        if not self.at("}"):
                            self.expect(",")
                    self.expect("}")
                ops[name] = md
            elif self.at_ident("core"):
                self.i += 1
                idx = self.integer()
                self.expect(":")
                if idx in streams:
                    raise UspecSyntaxError(f"core {idx} listed twice", t.line, t.col, self.source)
                names = []
                while self.tok.kind == "ident" and self.tok.text not in self.PROGRAM_KEYWORDS:
                    stream_toks.append((self.tok, self.tok.text))
                    names.append(self.tok.text)
                    self.i += 1
                streams[idx] = tuple(names)
                stream_toks.append((t, f"#core{idx}"))
            elif self.at_ident("table"):
                self.i += 1
                name = self.ident("table name")
                self.expect(":")
                rows = []
                while self.at("("):
                    self.i += 1
                    row = [self.ident("operation")]
                    while self.at(","):
                        self.i += 1
                        row.append(self.ident("operation"))
                    self.expect(")")
                    rows.append(tuple(row))
                if name in tables:
                    raise UspecSyntaxError(f"table {name!r} given twice", t.line, t.col, self.source)
                tables[name] = frozenset(rows)
            else:
                self.error("expected 'cores', 'stages', 'op', 'core' or 'table'")
        if cores is None:
            raise UspecSyntaxError("missing 'cores:' header", 1, 1, self.source)
        for tok, name in stream_toks:
            if name.startswith("#core"):
                if int(name[5:]) >= cores:
                    raise UspecSyntaxError(f"core index {name[5:]} out of range",
                                           tok.line, tok.col, self.source)
            elif name not in ops:
                raise UspecSyntaxError(f"unknown operation {name!r}", tok.line, tok.col, self.source)
        try:
            domain = OperationDomain.from_dict(ops)
            return Program(cores, tuple(streams.get(c, ()) for c in range(cores)), domain,
                           tuple(sorted(tables.items())), stages)
        except ConfigError as e:
            raise UspecSyntaxError(str(e), 1, 1, self.source) from None


def parse_axioms(text: str, source: str = "<axioms>") -> AxiomSet:
    return _Parser(text, source).axiom_file()


def parse_formula(text: str) -> tuple[tuple[tuple[str, str], ...], Formula]:
    """Parse a quantified formula on its own (no file header)."""
    p = _Parser(text, "<formula>")
    q = p.prefix()
    f = p.implication()
    if p.tok.kind != "eof":
        p.error("trailing input")
    return q, f


def parse_program(text: str, source: str = "<program>") -> Program:
    return _Parser(text, source).program_file()


_EVENT_RE = re.compile(r"^c(\d+):(\d+)\.([A-Za-z_][A-Za-z0-9_]*)$")


def parse_event(token: str, program: Program, stages: Optional[StageSet] = None,
                line: int = 1, col: int = 1, source: str = "<trace>") -> Event:
    m = _EVENT_RE.match(token)
    if not m:
        raise UspecSyntaxError(f"malformed event token {token!r}", line, col, source)
    core, label, stage = int(m.group(1)), int(m.group(2)), m.group(3)
    if core >= program.num_cores:
        raise UspecSyntaxError(f"no core {core}", line, col, source)
    k = label - program.offset(core)
    if not 0 <= k < len(program.streams[core]):
        raise UspecSyntaxError(f"no instruction c{core}:{label}", line, col, source)
    if stages is not None and stage not in stages:
        raise UspecSyntaxError(f"unknown stage {stage!r}", line, col, source)
    return Event(Instruction(core, label, program.streams[core][k]), stage)


def parse_traces(text: str, program: Program, stages: Optional[StageSet] = None,
                 source: str = "<trace>") -> list[tuple[Event, ...]]:
    """One trace per non-empty line."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        trace = []
        for m in re.finditer(r"\S+", body):
            trace.append(parse_event(m.group(), program, stages, lineno, m.start() + 1, source))
        if trace:
            out.append(tuple(trace))
    return out


def parse_trace(text: str, program: Program, stages: Optional[StageSet] = None,
                source: str = "<trace>") -> tuple[Event, ...]:
    """All tokens of the file form a single trace."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        for m in re.finditer(r"\S+", body):
            out.append(parse_event(m.group(), program, stages, lineno, m.start() + 1, source))
    if len(set(out)) != len(out):
        raise UspecSyntaxError("trace repeats an event", 1, 1, source)
    return tuple(out)


# -- printers -----------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3, Not: 4}


def _prec(f) -> int:
    return _PREC.get(type(f), 5)


def print_formula(f: Formula) -> str:
    if isinstance(f, Hb):
        return f"hb({f.v1}.{f.s1}, {f.v2}.{f.s2})"
    if isinstance(f, RefOrder):
        return f"{f.v1} <r {f.v2}"
    if isinstance(f, PredAtom):
        return f"{f.name}({', '.join(f.args)})"
    if isinstance(f, Not):
        inner = print_formula(f.arg)
        return "~" + (inner if _prec(f.arg) >= 4 else f"({inner})")
    op = {And: "/\\", Or: "\\/", Implies: "=>"}[type(f)]
    p = _prec(f)
    left, right = print_formula(f.left), print_formula(f.right)
    if isinstance(f, Implies):
        if _prec(f.left) <= p:
            left = f"({left})"
        if _prec(f.right) < p:
            right = f"({right})"
    else:
        if _prec(f.left) < p:
            left = f"({left})"
        if _prec(f.right) <= p:
            right = f"({right})"
    return f"{left} {op} {right}"


def print_prefix(quants: Sequence[tuple[str, str]]) -> str:
    parts = []
    prev = None
    for kind, var in quants:
        parts.append(var if kind == prev else f"{kind} {var}")
        prev = kind
    return ", ".join(parts) + "."


def print_axiom(ax: Axiom) -> str:
    return f'axiom "{ax.name}": {print_prefix(ax.quantifiers)} {print_formula(ax.matrix)}'


_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_RESERVED_LIT = {"forall", "fall", "exists"}


def _print_value(v) -> str:
    if isinstance(v, int):
        return str(v)
    if _IDENT_RE.match(v) and v not in _RESERVED_LIT:
        return v
    return f'"{v}"'


def print_term(t: Term) -> str:
    if isinstance(t, Lit):
        return _print_value(t.value)
    if isinstance(t, MetaRef):
        return f"{t.key}({t.var})"
    if isinstance(t, CoreRef):
        return f"core({t.var})"
    if isinstance(t, LabelRef):
        return f"label({t.var})"
    return f"{print_term(t.left)} {t.op} {print_term(t.right)}"


_CPREC = {PImplies: 1, POr: 2, PAnd: 3, PNot: 4}


def print_cond(c: Cond) -> str:
    if isinstance(c, Cmp):
        return f"{print_term(c.left)} {c.op} {print_term(c.right)}"
    if isinstance(c, PNot):
        inner = print_cond(c.arg)
        return "~" + (inner if isinstance(c.arg, PNot) else f"({inner})")
    op = {PAnd: "/\\", POr: "\\/", PImplies: "=>"}[type(c)]
    p = _CPREC[type(c)]
    lp, rp = _CPREC.get(type(c.left), 5), _CPREC.get(type(c.right), 5)
    left, right = print_cond(c.left), print_cond(c.right)
    if isinstance(c, PImplies):
        left = f"({left})" if lp <= p else left
        right = f"({right})" if rp < p else right
    else:
        left = f"({left})" if lp < p else left
        right = f"({right})" if rp <= p else right
    return f"{left} {op} {right}"


def print_predicate(p: PredicateDef) -> str:
    if p.expr is None:
        return f"pred {p.name}/{p.arity} extern"
    return f"pred {p.name}({', '.join(p.params)}) := {print_cond(p.expr)}"


def print_axiom_set(s: AxiomSet) -> str:
    lines = [f"stages: {', '.join(s.stages.names)}"]
    lines += [print_predicate(p) for p in s.predicates]
    lines += [print_axiom(a) for a in s.axioms]
    return "\n".join(lines) + "\n"


def print_program(p: Program) -> str:
    lines = [f"cores: {p.num_cores}"]
    if p.stages is not None:
        lines.append(f"stages: {', '.join(p.stages)}")
    for name, md in p.domain.ops:
        body = ", ".join(f"{k} = {_print_value(v)}" for k, v in md)
        lines.append(f"op {name} {{ {body} }}" if body else f"op {name} {{}}")
    for c, stream in enumerate(p.streams):
        lines.append(f"core {c}: {' '.join(stream)}".rstrip())
    for name, rows in p.tables:
        body = " ".join("(" + ", ".join(r) + ")" for r in sorted(rows))
        lines.append(f"table {name}: {body}".rstrip())
    return "\n".join(lines) + "\n"


def print_trace(trace: Sequence[Event]) -> str:
    return " ".join(e.token for e in trace)
