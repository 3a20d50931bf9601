"""Programs, instructions, events and metadata predicates.

A program is a tuple of per-core instruction streams over a finite
operation domain.  Instructions are identified by ``(core, label)`` with
0-based labels; an event is an instruction paired with a pipeline stage.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import ConfigError

Value = Union[int, str]

DEFAULT_TRACE_CAP = 9
DEFAULT_ALPHABET_CAP = 8
DEFAULT_POSET_CAP = 6


def event_cap(default: int) -> int:
    """Event cap, overridable through ``USPECOP_EVENT_CAP``."""
    raw = os.environ.get("USPECOP_EVENT_CAP")
    return int(raw) if raw else default


def poset_cap(default: int = DEFAULT_POSET_CAP) -> int:
    raw = os.environ.get("USPECOP_POSET_CAP")
    return int(raw) if raw else default


@dataclass(frozen=True)
class StageSet:
    """Ordered, duplicate-free pipeline stage names."""

    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise ConfigError("stage set must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise ConfigError(f"duplicate stage in {', '.join(self.names)}")

    def __iter__(self):
        return iter(self.names)

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.names

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ConfigError(f"unknown stage {name!r}") from None


@dataclass(frozen=True)
class OperationDomain:
    """Named operations, all carrying the same metadata keys."""

    ops: tuple[tuple[str, tuple[tuple[str, Value], ...]], ...]

    def __post_init__(self):
        names = [n for n, _ in self.ops]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate operation name")
        keysets = {tuple(sorted(k for k, _ in md)) for _, md in self.ops}
        if len(keysets) > 1:
            raise ConfigError("operations carry different metadata keys")

    @classmethod
    def from_dict(cls, ops: Mapping[str, Mapping[str, Value]]) -> "OperationDomain":
        return cls(tuple((n, tuple(md.items())) for n, md in ops.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.ops)

    @property
    def keys(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.ops[0][1]) if self.ops else ()

    def metadata(self, op: str) -> dict[str, Value]:
        for n, md in self.ops:
            if n == op:
                return dict(md)
        raise ConfigError(f"unknown operation {op!r}")

    def value(self, op: str, key: str) -> Value:
        md = self.metadata(op)
        if key not in md:
            raise ConfigError(f"unknown metadata key {key!r}")
        return md[key]


@dataclass(frozen=True, order=True)
class Instruction:
    core: int
    label: int
    op: str = field(compare=True)

    @property
    def key(self) -> tuple[int, int]:
        return (self.core, self.label)

    def __str__(self):
        return f"c{self.core}:{self.label}"


@dataclass(frozen=True)
class Event:
    instr: Instruction
    stage: str

    @property
    def token(self) -> str:
        return f"c{self.instr.core}:{self.instr.label}.{self.stage}"

    @property
    def sort_key(self):
        return (self.instr.core, self.instr.label, self.stage)

    def __str__(self):
        return self.token


def ref_order(a: Instruction, b: Instruction) -> bool:
    """Program order: same core and strictly smaller label."""
    return a.core == b.core and a.label < b.label


# -- metadata predicate expressions -------------------------------------------

@dataclass(frozen=True)
class MetaRef:
    key: str
    var: str


@dataclass(frozen=True)
class CoreRef:
    var: str


@dataclass(frozen=True)
class LabelRef:
    var: str


@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Arith:
    op: str  # '+' or '-'
    left: "Term"
    right: "Term"


Term = Union[MetaRef, CoreRef, LabelRef, Lit, Arith]


@dataclass(frozen=True)
class Cmp:
    op: str  # == != < <= > >=
    left: Term
    right: Term


@dataclass(frozen=True)
class PNot:
    arg: "Cond"


@dataclass(frozen=True)
class PAnd:
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class POr:
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class PImplies:
    left: "Cond"
    right: "Cond"


Cond = Union[Cmp, PNot, PAnd, POr, PImplies]


def _walk_terms(node):
    if isinstance(node, Cmp):
        yield from _walk_terms(node.left)
        yield from _walk_terms(node.right)
    elif isinstance(node, PNot):
        yield from _walk_terms(node.arg)
    elif isinstance(node, (PAnd, POr, PImplies)):
        yield from _walk_terms(node.left)
        yield from _walk_terms(node.right)
    elif isinstance(node, Arith):
        yield node
        yield from _walk_terms(node.left)
        yield from _walk_terms(node.right)
    else:
        yield node


@dataclass(frozen=True)
class PredicateDef:
    """A named predicate over instruction tuples.

    Exactly one of ``expr`` (evaluated on metadata) or ``table`` (a set of
    operation-name tuples) is set once bound; ``extern`` definitions carry
    neither and must be bound to a program-supplied table before use.
    """

    name: str
    arity: int
    params: tuple[str, ...] = ()
    expr: Optional[Cond] = None
    table: Optional[frozenset] = None

    def __post_init__(self):
        if self.expr is not None:
            if len(self.params) != self.arity:
                raise ConfigError(f"predicate {self.name}: arity/parameter mismatch")
            if len(set(self.params)) != len(self.params):
                raise ConfigError(f"predicate {self.name}: repeated parameter")
            for t in _walk_terms(self.expr):
                if isinstance(t, (MetaRef, CoreRef, LabelRef)) and t.var not in self.params:
                    raise ConfigError(f"predicate {self.name}: unbound variable {t.var!r}")
        if self.table is not None:
            for row in self.table:
                if len(row) != self.arity:
                    raise ConfigError(f"table {self.name}: row {row} has wrong arity")

    @property
    def extern(self) -> bool:
        return self.expr is None and self.table is None

    @property
    def reads_position(self) -> bool:
        """True when the value depends on core/label, not just operations."""
        if self.expr is None:
            return False
        return any(isinstance(t, (CoreRef, LabelRef)) for t in _walk_terms(self.expr))

    def metadata_keys(self) -> set[str]:
        if self.expr is None:
            return set()
        return {t.key for t in _walk_terms(self.expr) if isinstance(t, MetaRef)}


def _term_value(term: Term, env: Mapping[str, Instruction], domain: OperationDomain) -> Value:
    if isinstance(term, Lit):
        return term.value
    if isinstance(term, MetaRef):
        return domain.value(env[term.var].op, term.key)
    if isinstance(term, CoreRef):
        return env[term.var].core
    if isinstance(term, LabelRef):
        return env[term.var].label
    a = _term_value(term.left, env, domain)
    b = _term_value(term.right, env, domain)
    if not (isinstance(a, int) and isinstance(b, int)):
        raise ConfigError(f"arithmetic on non-integer metadata ({a!r} {term.op} {b!r})")
    return a + b if term.op == "+" else a - b


_ORDERED = {"<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
            ">": lambda a, b: a > b, ">=": lambda a, b: a >= b}


def _cond_value(node: Cond, env, domain) -> bool:
    if isinstance(node, Cmp):
        a = _term_value(node.left, env, domain)
        b = _term_value(node.right, env, domain)
        if node.op == "==":
            return a == b
        if node.op == "!=":
            return a != b
        if not (isinstance(a, int) and isinstance(b, int)):
            raise ConfigError(f"ordering comparison on non-integer values {a!r}, {b!r}")
        return _ORDERED[node.op](a, b)
    if isinstance(node, PNot):
        return not _cond_value(node.arg, env, domain)
    if isinstance(node, PAnd):
        return _cond_value(node.left, env, domain) and _cond_value(node.right, env, domain)
    if isinstance(node, POr):
        return _cond_value(node.left, env, domain) or _cond_value(node.right, env, domain)
    return (not _cond_value(node.left, env, domain)) or _cond_value(node.right, env, domain)


def eval_predicate(defn: PredicateDef, instrs: Sequence[Instruction],
                   domain: OperationDomain) -> bool:
    if len(instrs) != defn.arity:
        raise ConfigError(f"predicate {defn.name} expects {defn.arity} arguments, got {len(instrs)}")
    if defn.table is not None:
        return tuple(i.op for i in instrs) in defn.table
    if defn.expr is None:
        raise ConfigError(f"predicate {defn.name} is extern and has no table")
    return _cond_value(defn.expr, dict(zip(defn.params, instrs)), domain)


class Interpretation:
    """Predicate lookup with memoisation keyed on what each predicate reads."""

    def __init__(self, predicates: Mapping[str, PredicateDef], domain: OperationDomain):
        self.predicates = dict(predicates)
        self.domain = domain
        self._cache: dict = {}

    def __call__(self, name: str, instrs: Sequence[Instruction]) -> bool:
        defn = self.predicates.get(name)
        if defn is None:
            raise ConfigError(f"unknown predicate {name!r}")
        key = (name, tuple(instrs) if defn.reads_position else tuple(i.op for i in instrs))
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = eval_predicate(defn, instrs, self.domain)
        return hit


@dataclass(frozen=True)
class Program:
    """Per-core operation streams; ``offsets`` shifts labels for residual programs."""

    num_cores: int
    streams: tuple[tuple[str, ...], ...]
    domain: OperationDomain
    tables: tuple[tuple[str, frozenset], ...] = ()
    stages: Optional[tuple[str, ...]] = None
    offsets: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.num_cores < 1:
            raise ConfigError("program must have at least one core")
        if len(self.streams) != self.num_cores:
            raise ConfigError("stream count differs from core count")
        known = set(self.domain.names)
        for stream in self.streams:
            for op in stream:
                if op not in known:
                    raise ConfigError(f"unknown operation {op!r}")
        for name, rows in self.tables:
            for row in rows:
                for op in row:
                    if op not in known:
                        raise ConfigError(f"table {name}: unknown operation {op!r}")

    def offset(self, core: int) -> int:
        return self.offsets[core] if self.offsets else 0

    def instrs(self) -> tuple[Instruction, ...]:
        return tuple(Instruction(c, self.offset(c) + k, op)
                     for c, stream in enumerate(self.streams)
                     for k, op in enumerate(stream))

    def table_predicates(self) -> dict[str, PredicateDef]:
        out = {}
        for name, rows in self.tables:
            arities = {len(r) for r in rows}
            if len(arities) > 1:
                raise ConfigError(f"table {name}: rows of different arity")
            out[name] = PredicateDef(name, arities.pop() if arities else -1, table=rows)
        return out

    def size(self) -> int:
        return sum(len(s) for s in self.streams)


def events_of(program_or_instrs, stages: Iterable[str]) -> tuple[Event, ...]:
    instrs = program_or_instrs.instrs() if isinstance(program_or_instrs, Program) else program_or_instrs
    stages = tuple(stages)
    return tuple(Event(i, st) for i in instrs for st in stages)


def prefix_split(program: Program, cut: Sequence[int]) -> tuple[Program, Program]:
    """Split each core's stream after ``cut[c]`` instructions.

    The residual keeps original labels through ``offsets`` so the two halves
    have disjoint instruction sets.
    """
    if len(cut) != program.num_cores:
        raise ConfigError("cut must give one position per core")
    for c, k in enumerate(cut):
        if not 0 <= k <= len(program.streams[c]):
            raise ConfigError(f"cut position {k} out of range on core {c}")
    base = program.offsets or (0,) * program.num_cores
    prefix = Program(program.num_cores, tuple(s[:k] for s, k in zip(program.streams, cut)),
                     program.domain, program.tables, program.stages, program.offsets)
    residual = Program(program.num_cores, tuple(s[k:] for s, k in zip(program.streams, cut)),
                       program.domain, program.tables, program.stages,
                       tuple(b + k for b, k in zip(base, cut)))
    return prefix, residual
