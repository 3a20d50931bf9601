"""Decision procedures for refinability and extensibility.

Refinability is searched over small programs (at most as many instructions
as the largest axiom arity) and every strict partial order over the events
the axioms mention.  Extensibility is decided per axiom by language
inclusion: for every consistent context and every prefix-closed proper
subset of the axiom's variables, all orderings that place the subset's
events first must be accepted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Sequence

from .automata import (Context, agreeing_assignments, atom_value, build_automaton,
                       enumerate_contexts, realized_contexts)
from .core import Event, Instruction, Interpretation, OperationDomain, Program, poset_cap
from .errors import CapExceeded, UnsupportedAxiom
from .lang import (And, Axiom, AxiomSet, Formula, Hb, Not, Or, PredAtom, RefOrder,
                   bind)
from .uhb import LinearTrace, MuHbGraph

# -- posets -------------------------------------------------------------------


@lru_cache(maxsize=None)
def _posets(n: int) -> tuple[tuple[int, ...], ...]:
    """Labelled strict partial orders on range(n), as successor bitmasks."""
    if n == 0:
        return ((),)
    out = []
    for succ in _posets(n - 1):
        m = n - 1
        pred = [0] * m
        for a in range(m):
            for b in range(m):
                if succ[a] >> b & 1:
                    pred[b] |= 1 << a
        downs, ups = [], []
        for mask in range(1 << m):
            members = [a for a in range(m) if mask >> a & 1]
            if all(pred[a] & ~mask == 0 for a in members):
                downs.append(mask)
            if all(succ[a] & ~mask == 0 for a in members):
                ups.append(mask)
        new = 1 << m
        for d in downs:
            dm = [a for a in range(m) if d >> a & 1]
            for u in ups:
                if d & u or any(succ[a] & u != u for a in dm):
                    continue
                s = list(succ)
                for a in dm:
                    s[a] |= new
                s.append(u)
                out.append(tuple(s))
    return tuple(out)


def enumerate_posets(n: int) -> Iterator[frozenset]:
    """Every strict partial order on ``range(n)`` as a set of pairs, once each."""
    cap = poset_cap()
    if n > cap:
        raise CapExceeded(f"poset enumeration over {n} elements exceeds cap {cap}")
    for succ in _posets(n):
        yield frozenset((a, b) for a in range(n) for b in range(n) if succ[a] >> b & 1)


def _pair_count(succ) -> int:
    return sum(bin(s).count("1") for s in succ)


def _linear_extensions(succ: Sequence[int], n: int) -> Iterator[tuple[int, ...]]:
    pred = [0] * n
    for a in range(n):
        for b in range(n):
            if succ[a] >> b & 1:
                pred[b] |= 1 << a
    out: list[int] = []

    def go(placed: int):
        if len(out) == n:
            yield tuple(out)
            return
        for x in range(n):
            if not placed >> x & 1 and pred[x] & ~placed == 0:
                out.append(x)
                yield from go(placed | 1 << x)
                out.pop()

    yield from go(0)


def _reduction(succ: Sequence[int], n: int) -> list[tuple[int, int]]:
    edges = []
    for a in range(n):
        for b in range(n):
            if succ[a] >> b & 1 and not any(succ[a] >> c & 1 and succ[c] >> b & 1 for c in range(n)):
                edges.append((a, b))
    return edges


# -- ground instances over a small program ------------------------------------

def _eval_rel(f: Formula, env, idx, rel, interp) -> bool:
    if isinstance(f, Hb):
        a = idx.get((env[f.v1], f.s1))
        b = idx.get((env[f.v2], f.s2))
        return a != b and rel(a, b)
    if isinstance(f, (RefOrder, PredAtom)):
        return atom_value(f, env, interp)
    if isinstance(f, Not):
        return not _eval_rel(f.arg, env, idx, rel, interp)
    if isinstance(f, And):
        return _eval_rel(f.left, env, idx, rel, interp) and _eval_rel(f.right, env, idx, rel, interp)
    if isinstance(f, Or):
        return _eval_rel(f.left, env, idx, rel, interp) or _eval_rel(f.right, env, idx, rel, interp)
    return (not _eval_rel(f.left, env, idx, rel, interp)) or _eval_rel(f.right, env, idx, rel, interp)


def mentioned_stages(axiom_set: AxiomSet) -> tuple[str, ...]:
    seen = set()
    for ax in axiom_set.axioms:
        for a in ax.hb_atoms():
            seen.update((a.s1, a.s2))
    return tuple(s for s in axiom_set.stages.names if s in seen)


def _compositions(m: int) -> Iterator[tuple[int, ...]]:
    if m == 0:
        yield ()
        return
    for first in range(m, 0, -1):
        for rest in _compositions(m - first):
            yield (first,) + rest


def small_programs(axiom_set: AxiomSet, domain_program: Program, max_instrs: int
                   ) -> Iterator[Program]:
    """Programs of 1..max_instrs instructions, one per distinct predicate profile."""
    ops = domain_program.domain.names
    domain = domain_program.domain
    if not ops:
        domain = OperationDomain((("_", ()),))
        ops = ("_",)
    seen = set()
    for m in range(1, max_instrs + 1):
        for shape in _compositions(m):
            for opt in itertools.product(ops, repeat=m):
                it = iter(opt)
                streams = tuple(tuple(next(it) for _ in range(k)) for k in shape)
                prog = Program(len(shape), streams, domain, domain_program.tables)
                key = (shape, _profile(axiom_set, prog))
                if key in seen:
                    continue
                seen.add(key)
                yield prog


def _profile(axiom_set: AxiomSet, prog: Program) -> tuple:
    interp = Interpretation(axiom_set.predicate_map(), prog.domain)
    instrs = prog.instrs()
    out = []
    for ax in axiom_set.axioms:
        catoms = ax.context_atoms()
        for tup in itertools.permutations(instrs, ax.arity):
            env = dict(zip(ax.variables, tup))
            out.append(tuple(atom_value(a, env, interp) for a in catoms))
    return tuple(out)


class _Instances:
    """All ground instances of a universal axiom set over one program."""

    def __init__(self, axiom_set: AxiomSet, prog: Program, stages: Sequence[str]):
        self.instrs = prog.instrs()
        self.events = [(i, st) for i in self.instrs for st in stages]
        self.idx = {e: k for k, e in enumerate(self.events)}
        self.interp = Interpretation(axiom_set.predicate_map(), prog.domain)
        self.items = []
        for ax in axiom_set.axioms:
            for tup in itertools.permutations(self.instrs, ax.arity):
                self.items.append((ax.matrix, dict(zip(ax.variables, tup))))

    def holds(self, rel) -> bool:
        return all(_eval_rel(f, env, self.idx, rel, self.interp) for f, env in self.items)


@dataclass(frozen=True)
class RefinabilityWitness:
    program: Program
    graph: MuHbGraph
    linearization: LinearTrace


@dataclass(frozen=True)
class RefinabilityResult:
    refinable: bool
    witness: Optional[RefinabilityWitness]
    programs_checked: int


def check_refinability(axiom_set: AxiomSet, domain_program: Program,
                       cap: Optional[int] = None) -> RefinabilityResult:
    """Search for a valid graph with an invalid linearization."""
    for ax in axiom_set.axioms:
        if not ax.universal:
            raise UnsupportedAxiom(f"axiom {ax.name!r} is not universal")
    bound = bind(axiom_set, domain_program)
    k = bound.max_arity
    stages = mentioned_stages(bound)
    cap = cap if cap is not None else poset_cap()
    if k * len(stages) > cap:
        raise CapExceeded(f"refinability search needs posets over {k * len(stages)} events; cap is {cap}")
    count = 0
    for prog in small_programs(bound, domain_program, k):
        count += 1
        inst = _Instances(bound, prog, stages)
        n = len(inst.events)
        valid_perm = {}
        for perm in itertools.permutations(range(n)):
            pos = [0] * n
            for p, e in enumerate(perm):
                pos[e] = p
            valid_perm[perm] = inst.holds(lambda a, b: pos[a] < pos[b])
        if all(valid_perm.values()):
            continue
        posets = sorted(_posets(n), key=_pair_count)
        for succ in posets:
            if not inst.holds(lambda a, b: bool(succ[a] >> b & 1)):
                continue
            for lin in _linear_extensions(succ, n):
                if not valid_perm[lin]:
                    return RefinabilityResult(False, _witness(prog, inst, succ, lin, bound), count)
    return RefinabilityResult(True, None, count)


def _witness(prog: Program, inst: _Instances, succ, lin, axiom_set: AxiomSet) -> RefinabilityWitness:
    n = len(inst.events)
    ev = [Event(i, st) for i, st in inst.events]
    allev = [Event(i, st) for i in prog.instrs() for st in axiom_set.stages.names]
    edges = [(ev[a], ev[b]) for a, b in _reduction(succ, n)]
    g = MuHbGraph.build(allev, edges)
    extra = sorted((e for e in allev if e not in set(ev)), key=lambda e: e.sort_key)
    return RefinabilityWitness(prog, g, tuple(ev[x] for x in lin) + tuple(extra))


# -- extensibility --------------------------------------------------------------


def prefix_closed_subsets(ax: Axiom, cxt: Context) -> list[tuple[str, ...]]:
    """Proper non-empty variable subsets closed under the context's true ``<r`` atoms."""
    variables = ax.variables
    order = [(a.v1, a.v2) for a, v in zip(cxt.atoms, cxt.values) if isinstance(a, RefOrder) and v]
    out = []
    for size in range(1, len(variables)):
        for sub in itertools.combinations(variables, size):
            s = set(sub)
            if all(lo in s for lo, hi in order if hi in s):
                out.append(sub)
    return out


@dataclass(frozen=True)
class ExtensibilityWitness:
    axiom: str
    context: Context
    subset: tuple[str, ...]
    word: tuple[tuple[str, str], ...]
    assignment: Optional[tuple[Instruction, ...]]

    def word_text(self) -> str:
        return " ".join(f"{v}.{s}" for v, s in self.word)


@dataclass(frozen=True)
class ExtensibilityResult:
    extensible: bool
    per_axiom: tuple[tuple[str, bool], ...]
    witness: Optional[ExtensibilityWitness]


def check_axiom_extensibility(ax: Axiom, axiom_set: AxiomSet, domain: OperationDomain
                              ) -> Optional[ExtensibilityWitness]:
    if not ax.universal:
        raise UnsupportedAxiom(f"axiom {ax.name!r} is not universal")
    realized = realized_contexts(ax, axiom_set, domain)
    for cxt in enumerate_contexts(ax):
        if cxt.values not in realized:
            continue
        aut = build_automaton(ax, cxt, axiom_set.stages.names)
        for sub in prefix_closed_subsets(ax, cxt):
            first = [k for k, (v, _) in enumerate(aut.alphabet) if v in sub]
            rest = [k for k, (v, _) in enumerate(aut.alphabet) if v not in sub]
            for p1 in itertools.permutations(first):
                for p2 in itertools.permutations(rest):
                    if not aut.accepts(p1 + p2):
                        word = tuple(aut.alphabet[k] for k in p1 + p2)
                        return ExtensibilityWitness(ax.name, cxt, sub, word, realized[cxt.values])
    return None


def check_extensibility(axiom_set: AxiomSet, domain_program: Program) -> ExtensibilityResult:
    bound = bind(axiom_set, domain_program)
    per, first = [], None
    for ax in bound.axioms:
        w = check_axiom_extensibility(ax, bound, domain_program.domain)
        per.append((ax.name, w is None))
        if w is not None and first is None:
            first = w
    return ExtensibilityResult(first is None, tuple(per), first)


def witness_program(w: ExtensibilityWitness, ax: Axiom, axiom_set: AxiomSet,
                    domain_program: Program) -> tuple[Program, LinearTrace]:
    """Concretise an extensibility witness into a program and an invalid trace."""
    tup = w.assignment
    if tup is None:
        tup = agreeing_assignments(w.context, ax, axiom_set, domain_program.domain, limit=1)[0]
    # compact labels per core while keeping their relative order
    cores = sorted({i.core for i in tup})
    remap_core = {c: k for k, c in enumerate(cores)}
    streams: dict[int, list[Instruction]] = {remap_core[c]: [] for c in cores}
    for i in sorted(tup, key=lambda i: (i.core, i.label)):
        streams[remap_core[i.core]].append(i)
    new_of = {}
    for c, lst in streams.items():
        for k, i in enumerate(lst):
            new_of[i] = Instruction(c, k, i.op)
    domain = domain_program.domain
    prog = Program(len(cores), tuple(tuple(i.op for i in streams[c]) for c in range(len(cores))),
                   domain, domain_program.tables)
    env = {v: new_of[i] for v, i in zip(ax.variables, tup)}
    head = [Event(env[v], st) for v, st in w.word]
    tail = sorted((Event(i, st) for i in prog.instrs() for st in axiom_set.stages.names
                   if Event(i, st) not in set(head)), key=lambda e: e.sort_key)
    return prog, tuple(head) + tuple(tail)


@dataclass(frozen=True)
class REResult:
    member: bool
    universal: tuple[tuple[str, bool], ...]
    extensibility: Optional[ExtensibilityResult]
    refinability: Optional[RefinabilityResult]


def is_uspecRE(axiom_set: AxiomSet, domain_program: Program) -> REResult:
    uni = tuple((a.name, a.universal) for a in axiom_set.axioms)
    if not all(u for _, u in uni):
        return REResult(False, uni, None, None)
    ext = check_extensibility(axiom_set, domain_program)
    ref = check_refinability(axiom_set, domain_program)
    return REResult(ext.extensible and ref.refinable, uni, ext, ref)
