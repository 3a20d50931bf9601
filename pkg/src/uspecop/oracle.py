"""Brute-force ground truth.

Everything here is built only on the core data model and the direct
happens-before evaluator; none of the automata or exploration code is used,
so comparisons against the operational model are independent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .core import DEFAULT_TRACE_CAP, Event, Instruction, Program, event_cap, events_of
from .errors import CapExceeded, ConfigError
from .lang import AxiomSet, bind, interpretation
from .meta import _posets, _profile, _reduction
from .opmodel import is_t_bounded
from .uhb import MuHbGraph, _check_all, _eval3, evaluate3, prefix_hb

DEFAULT_GRAPH_CAP = 6


def _trace_cap(cap: Optional[int]) -> int:
    return cap if cap is not None else event_cap(DEFAULT_TRACE_CAP)


def iter_valid_traces(axiom_set: AxiomSet, program: Program, cap: Optional[int] = None,
                      first: Optional[Event] = None) -> Iterator[tuple[Event, ...]]:
    """Valid permutations in lexicographic event order.

    Prefixes are pruned only when some axiom is already definitely false
    under three-valued evaluation, so nothing valid is skipped.  ``first``
    restricts the enumeration to traces starting with that event.
    """
    axiom_set = bind(axiom_set, program)
    evs = sorted(events_of(program, axiom_set.stages), key=lambda e: e.sort_key)
    limit = _trace_cap(cap)
    if len(evs) > limit:
        raise CapExceeded(f"{len(evs)} events exceed the trace cap of {limit}")
    instrs = program.instrs()
    interp = interpretation(axiom_set, program)
    pos: dict[Event, int] = {}
    hb3 = prefix_hb(pos)
    order: list[Event] = []
    n = len(evs)
    placed = [False] * n

    if axiom_set.universal:
        # ground instances touching each instruction; once every event is
        # placed each instance has been decided, so no final check is needed
        touching: dict = {i: [] for i in instrs}
        for ax in axiom_set.axioms:
            for tup in itertools.permutations(instrs, ax.arity):
                env = dict(zip(ax.variables, tup))
                for i in set(tup):
                    touching[i].append((ax.matrix, env))

        def dead(e: Event) -> bool:
            return any(_eval3(f, env, hb3, interp) is False for f, env in touching[e.instr])
    else:
        def dead(e: Event) -> bool:
            return any(evaluate3(ax, instrs, hb3, interp, only=e.instr) is False
                       for ax in axiom_set.axioms)

    def go():
        if len(order) == n:
            yield tuple(order)
            return
        for k in range(n):
            if placed[k]:
                continue
            e = evs[k]
            if first is not None and not order and e != first:
                continue
            placed[k] = True
            pos[e] = len(order)
            order.append(e)
            if not dead(e):
                yield from go()
            order.pop()
            del pos[e]
            placed[k] = False

    # the empty trace still has to satisfy the axioms (for instance an
    # existential with nothing to pick)
    if n == 0:
        if _check_all(axiom_set, program, lambda a, b: False, interp).valid:
            yield ()
        return
    if axiom_set.universal:
        yield from go()
        return
    for tr in go():
        full = {e: k for k, e in enumerate(tr)}
        if _check_all(axiom_set, program, lambda a, b: full[a] < full[b], interp).valid:
            yield tr


def enumerate_valid_traces(axiom_set: AxiomSet, program: Program, cap: Optional[int] = None
                           ) -> set[tuple[Event, ...]]:
    return set(iter_valid_traces(axiom_set, program, cap))


def enumerate_valid_graphs(axiom_set: AxiomSet, program: Program, cap: Optional[int] = None
                           ) -> list[MuHbGraph]:
    """Every valid partial order on the program's events, as reduced graphs."""
    axiom_set = bind(axiom_set, program)
    evs = sorted(events_of(program, axiom_set.stages), key=lambda e: e.sort_key)
    limit = cap if cap is not None else DEFAULT_GRAPH_CAP
    if len(evs) > limit:
        raise CapExceeded(f"{len(evs)} events exceed the graph cap of {limit}")
    interp = interpretation(axiom_set, program)
    idx = {e: k for k, e in enumerate(evs)}
    out = []
    for succ in _posets(len(evs)):
        def hb(a, b, succ=succ):
            return bool(succ[idx[a]] >> idx[b] & 1)
        if _check_all(axiom_set, program, hb, interp).valid:
            edges = [(evs[a], evs[b]) for a, b in _reduction(succ, len(evs))]
            out.append(MuHbGraph.build(evs, edges))
    return out


# -- equivalence --------------------------------------------------------------


@dataclass
class EquivalenceReport:
    t: int
    model_count: int
    oracle_count: int
    unsound: list = field(default_factory=list)  # emitted but invalid
    missing: list = field(default_factory=list)  # valid and t-bounded, not emitted
    extra: list = field(default_factory=list)  # valid but not t-bounded, emitted

    @property
    def equivalent(self) -> bool:
        return not (self.unsound or self.missing or self.extra)

    def to_json(self) -> dict:
        def txt(ts):
            return [" ".join(e.token for e in tr) for tr in ts]
        return {"schema": 1, "t": self.t, "equivalent": self.equivalent,
                "model_traces": self.model_count, "oracle_traces": self.oracle_count,
                "unsound": txt(self.unsound), "missing": txt(self.missing),
                "extra": txt(self.extra)}


def equivalence_check(axiom_set: AxiomSet, program: Program, t: int,
                      model: Optional[Sequence] = None, cap: Optional[int] = None,
                      bounded: bool = False, valid: Optional[set] = None) -> EquivalenceReport:
    """Compare emitted traces with the oracle's t-bounded valid traces.

    ``model`` overrides the emitted set (any iterable of traces); by default
    the exhaustive operational loop is run.  ``valid`` reuses a previously
    enumerated valid set for the same program.
    """
    if t < 1:
        raise ConfigError("t must be at least 1")
    if valid is None:
        valid = enumerate_valid_traces(axiom_set, program, cap)
    oracle = {tr for tr in valid if is_t_bounded(tr, program, t)}
    if model is None:
        from .opmodel import operational_loop
        model = operational_loop(axiom_set, program, t, bounded=bounded).traces
    m = set(model)
    key = lambda tr: [e.sort_key for e in tr]  # noqa: E731
    return EquivalenceReport(
        t, len(m), len(oracle),
        unsound=sorted(m - valid, key=key),
        missing=sorted(oracle - m, key=key),
        extra=sorted((m & valid) - oracle, key=key))


def naive_traces(axiom_set: AxiomSet, program: Program) -> list[tuple[Event, ...]]:
    """Every permutation of the program's events: a model that checks nothing."""
    evs = sorted(events_of(program, axiom_set.stages), key=lambda e: e.sort_key)
    return [tuple(p) for p in itertools.permutations(evs)]


# -- reference in-order pipeline ----------------------------------------------


class PipelineGenerator:
    """In-order pipeline with one instruction per stage per core.

    An instruction enters a stage after leaving the previous one and after
    its predecessor on the core has moved past that stage.  ``fault`` names
    an instruction whose last two stages are performed in swapped order.
    """

    def __init__(self, program: Program, stages: Sequence[str],
                 fault: Optional[Instruction] = None):
        self.program = program
        self.stages = tuple(stages)
        self.fault = fault
        self.streams = [[i for i in program.instrs() if i.core == c] for c in range(program.num_cores)]

    def _order(self, instr: Instruction) -> tuple[str, ...]:
        st = self.stages
        if instr == self.fault and len(st) >= 2:
            return st[:-2] + (st[-1], st[-2])
        return st

    def initial(self) -> tuple[int, ...]:
        """Stages completed per instruction, in program order."""
        return (0,) * sum(len(st) for st in self.streams)

    def final(self, state: tuple[int, ...]) -> bool:
        return all(p == len(self.stages) for p in state)

    def moves(self, state: tuple[int, ...]) -> list[tuple[Event, tuple[int, ...]]]:
        out = []
        D = len(self.stages)
        base = 0
        for stream in self.streams:
            for k, i in enumerate(stream):
                s = state[base + k]
                if s == D:
                    continue
                if k > 0:
                    prev = state[base + k - 1]
                    # the stage is free once the predecessor has moved past it
                    need = s + 2 if s + 1 < D else D
                    if prev < need:
                        continue
                nxt = state[:base + k] + (s + 1,) + state[base + k + 1:]
                out.append((Event(i, self._order(i)[s]), nxt))
            base += len(stream)
        return out

    def traces(self) -> Iterator[tuple[Event, ...]]:
        out: list[Event] = []

        def go(state):
            if self.final(state):
                yield tuple(out)
                return
            for e, nxt in self.moves(state):
                out.append(e)
                yield from go(nxt)
                out.pop()

        yield from go(self.initial())


def reference_pipeline_traces(program: Program, stages: Sequence[str],
                              fault: Optional[Instruction] = None) -> set[tuple[Event, ...]]:
    return set(PipelineGenerator(program, stages, fault).traces())


# -- program matrices ---------------------------------------------------------


def program_matrix(axiom_set: AxiomSet, domain_program: Program, max_cores: int = 2,
                   max_per_core: int = 2, dedup: bool = True) -> Iterator[Program]:
    """Programs over the domain's operations with nonempty streams.

    With ``dedup`` only one program per (shape, predicate profile) is kept:
    programs whose axioms see identical non-hb atom values have identical
    valid and emitted trace sets up to renaming of operations.
    """
    ops = domain_program.domain.names
    bind(axiom_set, domain_program)  # fails early when the domain lacks metadata
    seen = set()
    for ncores in range(1, max_cores + 1):
        for shape in itertools.product(range(1, max_per_core + 1), repeat=ncores):
            for opt in itertools.product(ops, repeat=sum(shape)):
                it = iter(opt)
                streams = tuple(tuple(next(it) for _ in range(k)) for k in shape)
                prog = Program(ncores, streams, domain_program.domain, domain_program.tables)
                if dedup:
                    key = (shape, _profile(bind(axiom_set, prog), prog))
                    if key in seen:
                        continue
                    seen.add(key)
                yield prog
