"""Happens-before graphs over events and axiom satisfaction on them.

``hb`` atoms are read through the transitive closure of the edge relation.
Quantifiers range over distinct instructions: every assignment is injective.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence

from .core import Event, Instruction, Interpretation, Program, events_of, ref_order
from .errors import ConfigError, NotAnExecution
from .lang import (EXISTS, FORALL, And, Axiom, AxiomSet, Formula, Hb, Not, Or,
                   PredAtom, RefOrder, interpretation, parse_event)

LinearTrace = tuple[Event, ...]


@dataclass(frozen=True)
class MuHbGraph:
    nodes: frozenset
    edges: frozenset

    def __post_init__(self):
        for a, b in self.edges:
            if a not in self.nodes or b not in self.nodes:
                raise ConfigError(f"edge {a} -> {b} leaves the node set")

    @classmethod
    def build(cls, nodes: Iterable[Event], edges: Iterable[tuple[Event, Event]] = ()) -> "MuHbGraph":
        return cls(frozenset(nodes), frozenset(edges))

    def successors(self) -> dict[Event, list[Event]]:
        succ = {n: [] for n in self.nodes}
        for a, b in self.edges:
            succ[a].append(b)
        return succ

    def closure(self) -> frozenset:
        succ = self.successors()
        out = set()
        for n in self.nodes:
            stack = list(succ[n])
            seen = set()
            while stack:
                m = stack.pop()
                if m in seen:
                    continue
                seen.add(m)
                stack.extend(succ[m])
            out.update((n, m) for m in seen)
        return frozenset(out)

    def is_acyclic(self) -> bool:
        return not any(a == b for a, b in self.closure())

    def sinks(self) -> frozenset:
        has_out = {a for a, _ in self.edges}
        return frozenset(n for n in self.nodes if n not in has_out)

    def sources(self) -> frozenset:
        has_in = {b for _, b in self.edges}
        return frozenset(n for n in self.nodes if n not in has_in)

    def to_json(self) -> str:
        nodes = sorted(self.nodes, key=lambda e: e.sort_key)
        edges = sorted(self.edges, key=lambda p: (p[0].sort_key, p[1].sort_key))
        return json.dumps({"schema": 1, "nodes": [n.token for n in nodes],
                           "edges": [[a.token, b.token] for a, b in edges]}, indent=1)

    def to_dot(self, name: str = "uhb") -> str:
        lines = [f"digraph {name} {{"]
        for n in sorted(self.nodes, key=lambda e: e.sort_key):
            lines.append(f'  "{n.token}";')
        for a, b in sorted(self.edges, key=lambda p: (p[0].sort_key, p[1].sort_key)):
            lines.append(f'  "{a.token}" -> "{b.token}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def graph_from_json(text: str, program: Program) -> MuHbGraph:
    try:
        data = json.loads(text)
        nodes = [parse_event(t, program) for t in data["nodes"]]
        edges = [(parse_event(a, program), parse_event(b, program)) for a, b in data["edges"]]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"malformed graph JSON: {e}") from None
    return MuHbGraph.build(nodes, edges)


_DOT_NODE = re.compile(r'"([^"]+)"\s*;')
_DOT_EDGE = re.compile(r'"([^"]+)"\s*->\s*"([^"]+)"')


def graph_from_dot(text: str, program: Program) -> MuHbGraph:
    nodes, edges = set(), set()
    for line in text.splitlines():
        m = _DOT_EDGE.search(line)
        if m:
            a, b = parse_event(m.group(1), program), parse_event(m.group(2), program)
            edges.add((a, b))
            nodes.update((a, b))
            continue
        m = _DOT_NODE.search(line)
        if m:
            nodes.add(parse_event(m.group(1), program))
    return MuHbGraph.build(nodes, edges)


def load_graph(text: str, program: Program) -> MuHbGraph:
    return graph_from_json(text, program) if text.lstrip().startswith("{") else graph_from_dot(text, program)


def chain_graph(trace: Sequence[Event]) -> MuHbGraph:
    return MuHbGraph.build(trace, zip(trace, trace[1:]))


# -- evaluation ---------------------------------------------------------------

def _as_interp(predicates, program: Program) -> Interpretation:
    if isinstance(predicates, Interpretation):
        return predicates
    if isinstance(predicates, AxiomSet):
        return interpretation(predicates, program)
    return Interpretation(dict(predicates or {}), program.domain)


def eval_matrix(f: Formula, env: Mapping[str, Instruction], hb: Callable[[Event, Event], bool],
                interp: Interpretation) -> bool:
    if isinstance(f, Hb):
        return hb(Event(env[f.v1], f.s1), Event(env[f.v2], f.s2))
    if isinstance(f, RefOrder):
        return ref_order(env[f.v1], env[f.v2])
    if isinstance(f, PredAtom):
        return interp(f.name, [env[a] for a in f.args])
    if isinstance(f, Not):
        return not eval_matrix(f.arg, env, hb, interp)
    if isinstance(f, And):
        return eval_matrix(f.left, env, hb, interp) and eval_matrix(f.right, env, hb, interp)
    if isinstance(f, Or):
        return eval_matrix(f.left, env, hb, interp) or eval_matrix(f.right, env, hb, interp)
    return (not eval_matrix(f.left, env, hb, interp)) or eval_matrix(f.right, env, hb, interp)


def evaluate(axiom: Axiom, instrs: Sequence[Instruction], hb, interp: Interpretation
             ) -> tuple[bool, Optional[dict]]:
    """Truth value and, when false, the assignment along the failing universal path."""
    quants = axiom.quantifiers
    env: dict[str, Instruction] = {}
    used: set = set()

    def go(k: int) -> bool:
        if k == len(quants):
            return eval_matrix(axiom.matrix, env, hb, interp)
        kind, var = quants[k]
        for i in instrs:
            if i in used:
                continue
            env[var] = i
            used.add(i)
            r = go(k + 1)
            used.discard(i)
            if kind == FORALL and not r:
                return False
            if kind == EXISTS and r:
                del env[var]
                return True
        env.pop(var, None)
        return kind == FORALL

    ok = go(0)
    if ok:
        return True, None
    witness = {}
    for kind, var in quants:
        if kind != FORALL or var not in env:
            break
        witness[var] = env[var]
    return False, witness


@dataclass(frozen=True)
class Verdict:
    valid: bool
    axiom: Optional[str] = None
    assignment: Optional[tuple[tuple[str, Instruction], ...]] = None

    def describe(self) -> str:
        if self.valid:
            return "valid"
        names = ", ".join(f"{v}={i}" for v, i in self.assignment or ())
        return f"violates {self.axiom}" + (f" at ({names})" if names else "")


def _check_all(axiom_set: AxiomSet, program: Program, hb, interp) -> Verdict:
    instrs = program.instrs()
    for ax in axiom_set.axioms:
        ok, wit = evaluate(ax, instrs, hb, interp)
        if not ok:
            return Verdict(False, ax.name, tuple((wit or {}).items()))
    return Verdict(True)


def _check_events(g: MuHbGraph, program: Program, stages):
    expected = set(events_of(program, stages))
    if set(g.nodes) != expected:
        missing = sorted(expected - set(g.nodes), key=lambda e: e.sort_key)
        extra = sorted(set(g.nodes) - expected, key=lambda e: e.sort_key)
        raise ConfigError("graph nodes must be exactly the program events"
                          + (f"; missing {missing[0]}" if missing else "")
                          + (f"; unexpected {extra[0]}" if extra else ""))


def satisfies(g: MuHbGraph, program: Program, axiom: Axiom, predicates) -> bool:
    closure = g.closure()
    if any(a == b for a, b in closure):
        raise NotAnExecution("cyclic happens-before graph")
    ok, _ = evaluate(axiom, program.instrs(), lambda a, b: (a, b) in closure,
                     _as_interp(predicates, program))
    return ok


def is_valid(g: MuHbGraph, program: Program, axiom_set: AxiomSet) -> Verdict:
    _check_events(g, program, axiom_set.stages)
    closure = g.closure()
    if any(a == b for a, b in closure):
        raise NotAnExecution("cyclic happens-before graph")
    return _check_all(axiom_set, program, lambda a, b: (a, b) in closure,
                      interpretation(axiom_set, program))


def trace_positions(trace: Sequence[Event]) -> dict[Event, int]:
    return {e: k for k, e in enumerate(trace)}


def is_valid_trace(trace: Sequence[Event], program: Program, axiom_set: AxiomSet,
                   interp: Optional[Interpretation] = None) -> Verdict:
    """Validity of the chain graph of a complete trace, read off positions."""
    pos = trace_positions(trace)
    if len(pos) != len(trace) or set(pos) != set(events_of(program, axiom_set.stages)):
        raise ConfigError("trace must list every program event exactly once")
    return _check_all(axiom_set, program, lambda a, b: pos[a] < pos[b],
                      interp or interpretation(axiom_set, program))


# -- three-valued evaluation on trace prefixes -------------------------------

def _eval3(f: Formula, env, hb3, interp):
    if isinstance(f, Hb):
        return hb3(Event(env[f.v1], f.s1), Event(env[f.v2], f.s2))
    if isinstance(f, RefOrder):
        return ref_order(env[f.v1], env[f.v2])
    if isinstance(f, PredAtom):
        return interp(f.name, [env[a] for a in f.args])
    if isinstance(f, Not):
        v = _eval3(f.arg, env, hb3, interp)
        return None if v is None else not v
    if isinstance(f, And):
        a = _eval3(f.left, env, hb3, interp)
        if a is False:
            return False
        b = _eval3(f.right, env, hb3, interp)
        if b is False:
            return False
        return True if (a and b) else None
    if isinstance(f, Or):
        a = _eval3(f.left, env, hb3, interp)
        if a is True:
            return True
        b = _eval3(f.right, env, hb3, interp)
        if b is True:
            return True
        return False if (a is False and b is False) else None
    a = _eval3(f.left, env, hb3, interp)
    if a is False:
        return True
    b = _eval3(f.right, env, hb3, interp)
    if b is True:
        return True
    return False if (a is True and b is False) else None


def prefix_hb(pos: Mapping[Event, int]):
    """hb on a trace prefix: decided once either endpoint is placed."""
    def hb3(a: Event, b: Event):
        if a == b:
            return False
        pa, pb = pos.get(a), pos.get(b)
        if pa is not None:
            return pb is None or pa < pb
        return False if pb is not None else None
    return hb3


def evaluate3(axiom: Axiom, instrs: Sequence[Instruction], hb3, interp,
              only: Optional[Instruction] = None):
    """Kleene value of a quantified axiom; ``only`` restricts universal
    assignments to those touching one instruction (for incremental checks)."""
    quants = axiom.quantifiers
    env: dict = {}
    used: set = set()

    def go(k: int):
        if k == len(quants):
            if only is not None and only not in used:
                return True
            return _eval3(axiom.matrix, env, hb3, interp)
        kind, var = quants[k]
        unknown = False
        for i in instrs:
            if i in used:
                continue
            env[var] = i
            used.add(i)
            r = go(k + 1)
            used.discard(i)
            if kind == FORALL and r is False:
                return False
            if kind == EXISTS and r is True:
                return True
            if r is None:
                unknown = True
        if unknown:
            return None
        return kind == FORALL

    if only is not None and not axiom.universal:
        only = None
    return go(0)


# -- graph operations ---------------------------------------------------------

def refines(g1: MuHbGraph, g2: MuHbGraph) -> bool:
    """True when g2 orders at least everything g1 orders, over the same events."""
    return g1.nodes == g2.nodes and g1.closure() <= g2.closure()


def linearizations(g: MuHbGraph) -> Iterator[LinearTrace]:
    """All topological orders, lexicographic by event."""
    preds = {n: 0 for n in g.nodes}
    succ = g.successors()
    for _, b in g.edges:
        preds[b] += 1
    if not g.is_acyclic():
        raise NotAnExecution("cyclic happens-before graph")
    order = sorted(g.nodes, key=lambda e: e.sort_key)
    out: list[Event] = []
    placed: set = set()

    def go():
        if len(out) == len(order):
            yield tuple(out)
            return
        for n in order:
            if n in placed or preds[n]:
                continue
            placed.add(n)
            out.append(n)
            for m in succ[n]:
                preds[m] -= 1
            yield from go()
            for m in succ[n]:
                preds[m] += 1
            out.pop()
            placed.discard(n)

    yield from go()


def compose_sequential(g1: MuHbGraph, g2: MuHbGraph) -> MuHbGraph:
    """Order every sink of ``g1`` before every source of ``g2``."""
    if g1.nodes & g2.nodes:
        raise ConfigError("sequential composition needs disjoint node sets")
    bridge = {(a, b) for a in g1.sinks() for b in g2.sources()}
    return MuHbGraph(g1.nodes | g2.nodes, g1.edges | g2.edges | frozenset(bridge))
