"""Axiom automata, their concretisation and monitor banks.

For a universal axiom and a *context* (a truth value for each non-hb atom),
the automaton accepts exactly the orderings of the hb-mentioned symbolic
events ``(variable, stage)`` under which the matrix holds.  The language is
finite, so it is built by enumerating permutations into a trie and merging
nodes with equal residual languages, which yields the minimal trimmed DFA.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence

from .core import (DEFAULT_ALPHABET_CAP, Event, Instruction, Interpretation, OperationDomain,
                   Program, event_cap, ref_order)
from .errors import CapExceeded, ConfigError, UnsupportedAxiom
from .lang import (EXISTS, FORALL, And, Atom, Axiom, AxiomSet, Formula, Hb, Not, Or,
                   PredAtom, RefOrder, interpretation, print_formula)

# -- contexts -----------------------------------------------------------------


@dataclass(frozen=True)
class Context:
    atoms: tuple
    values: tuple[bool, ...]

    @property
    def id(self) -> int:
        return sum(1 << k for k, v in enumerate(self.values) if v)

    def value(self, atom) -> bool:
        return self.values[self.atoms.index(atom)]

    def as_dict(self) -> dict[str, bool]:
        return {print_formula(a): v for a, v in zip(self.atoms, self.values)}

    def describe(self) -> str:
        if not self.atoms:
            return "{}"
        return "{" + ", ".join(f"{k}: {str(v).lower()}" for k, v in self.as_dict().items()) + "}"


def enumerate_contexts(ax: Axiom) -> list[Context]:
    """All 2^n contexts; context ``k`` sets atom ``j`` to bit ``j`` of ``k``."""
    atoms = ax.context_atoms()
    n = len(atoms)
    return [Context(atoms, tuple(bool((k >> j) & 1) for j in range(n))) for k in range(1 << n)]


def atom_value(a: Atom, env: Mapping[str, Instruction], interp: Interpretation) -> bool:
    if isinstance(a, RefOrder):
        return ref_order(env[a.v1], env[a.v2])
    return interp(a.name, [env[v] for v in a.args])


def context_of(ax: Axiom, env: Mapping[str, Instruction], interp: Interpretation) -> Context:
    atoms = ax.context_atoms()
    return Context(atoms, tuple(atom_value(a, env, interp) for a in atoms))


def small_universe(k: int, domain: OperationDomain) -> list[tuple[Instruction, ...]]:
    """Injective k-tuples of instructions with core, label < k and ops from the domain."""
    ops = domain.names or ("_",)
    positions = [(c, l) for c in range(k) for l in range(k)]
    out = []
    for pos in itertools.permutations(positions, k):
        for opt in itertools.product(ops, repeat=k):
            out.append(tuple(Instruction(c, l, o) for (c, l), o in zip(pos, opt)))
    return out


@lru_cache(maxsize=256)
def realized_contexts(ax: Axiom, axiom_set: AxiomSet, domain: OperationDomain
                      ) -> dict[tuple[bool, ...], tuple[Instruction, ...]]:
    """Context values realised in the small universe, each with one witness tuple."""
    interp = Interpretation(axiom_set.predicate_map(), domain)
    atoms = ax.context_atoms()
    out: dict = {}
    for tup in small_universe(ax.arity, domain):
        env = dict(zip(ax.variables, tup))
        key = tuple(atom_value(a, env, interp) for a in atoms)
        out.setdefault(key, tup)
    return out


def is_consistent(cxt: Context, ax: Axiom, axiom_set: AxiomSet, domain: OperationDomain) -> bool:
    return cxt.values in realized_contexts(ax, axiom_set, domain)


def agreeing_assignments(cxt: Context, ax: Axiom, axiom_set: AxiomSet, domain: OperationDomain,
                         limit: Optional[int] = None) -> list[tuple[Instruction, ...]]:
    interp = Interpretation(axiom_set.predicate_map(), domain)
    out = []
    for tup in small_universe(ax.arity, domain):
        env = dict(zip(ax.variables, tup))
        if tuple(atom_value(a, env, interp) for a in cxt.atoms) == cxt.values:
            out.append(tup)
            if limit is not None and len(out) >= limit:
                break
    return out


# -- symbolic evaluation ------------------------------------------------------

def _eval_symbolic(f: Formula, pos: Sequence[int], index: Mapping, ctx: Mapping) -> bool:
    if isinstance(f, Hb):
        a, b = (f.v1, f.s1), (f.v2, f.s2)
        if a == b:
            return False
        return pos[index[a]] < pos[index[b]]
    if isinstance(f, (RefOrder, PredAtom)):
        return ctx[f]
    if isinstance(f, Not):
        return not _eval_symbolic(f.arg, pos, index, ctx)
    if isinstance(f, And):
        return _eval_symbolic(f.left, pos, index, ctx) and _eval_symbolic(f.right, pos, index, ctx)
    if isinstance(f, Or):
        return _eval_symbolic(f.left, pos, index, ctx) or _eval_symbolic(f.right, pos, index, ctx)
    return (not _eval_symbolic(f.left, pos, index, ctx)) or _eval_symbolic(f.right, pos, index, ctx)


def symbolic_alphabet(matrix: Formula, variables: Sequence[str], stages: Sequence[str]
                      ) -> tuple[tuple[str, str], ...]:
    from .lang import atoms
    seen = set()
    for a in atoms(matrix):
        if isinstance(a, Hb):
            seen.add((a.v1, a.s1))
            seen.add((a.v2, a.s2))
    stages = list(stages)
    return tuple(sorted(seen, key=lambda e: (list(variables).index(e[0]), stages.index(e[1]))))


# -- automata -----------------------------------------------------------------


@dataclass(frozen=True)
class AxiomAutomaton:
    """Minimal trimmed DFA; missing transitions lead to rejection."""

    name: str
    context: Context
    variables: tuple[str, ...]
    alphabet: tuple[tuple[str, str], ...]
    delta: tuple[tuple[tuple[int, int], ...], ...]
    accepting: frozenset
    _tables: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def num_states(self) -> int:
        return len(self.delta)

    def trans(self) -> list[dict[int, int]]:
        t = self._tables.get("trans")
        if t is None:
            t = self._tables["trans"] = [dict(row) for row in self.delta]
        return t

    def step(self, state: int, sym: int) -> Optional[int]:
        return self.trans()[state].get(sym)

    def run(self, word: Iterable[int], state: int = 0) -> Optional[int]:
        trans = self.trans()
        for sym in word:
            state = trans[state].get(sym)
            if state is None:
                return None
        return state

    def accepts(self, word: Iterable[int]) -> bool:
        s = self.run(word)
        return s is not None and s in self.accepting

    def symbol(self, var: str, stage: str) -> int:
        return self.alphabet.index((var, stage))

    def word_count(self) -> list[int]:
        """Number of accepted continuations from each state."""
        wc = self._tables.get("wc")
        if wc is None:
            wc = [0] * self.num_states
            for s in reversed(range(self.num_states)):
                wc[s] = (1 if s in self.accepting else 0) + sum(wc[t] for _, t in self.delta[s])
            self._tables["wc"] = wc
        return wc

    def depth(self) -> list[int]:
        d = self._tables.get("depth")
        if d is None:
            d = [0] * self.num_states
            for s in range(self.num_states):
                for _, t in self.delta[s]:
                    d[t] = d[s] + 1
            self._tables["depth"] = d
        return d

    def full(self) -> list[bool]:
        """State accepts every ordering of the events still to come."""
        f = self._tables.get("full")
        if f is None:
            n = len(self.alphabet)
            wc, d = self.word_count(), self.depth()
            f = [wc[s] == math.factorial(n - d[s]) for s in range(self.num_states)]
            self._tables["full"] = f
        return f

    def is_active(self, state: int) -> bool:
        return not self.full()[state]

    def language(self) -> set[tuple[int, ...]]:
        out = set()

        def go(s, w):
            if s in self.accepting:
                out.add(tuple(w))
            for sym, t in self.delta[s]:
                w.append(sym)
                go(t, w)
                w.pop()

        if self.num_states:
            go(0, [])
        return out

    def symbol_name(self, sym: int) -> str:
        v, st = self.alphabet[sym]
        return f"{v}.{st}"

    def to_json(self) -> dict:
        return {"schema": 1, "axiom": self.name, "context": self.context.as_dict(),
                "context_id": self.context.id,
                "alphabet": [self.symbol_name(k) for k in range(len(self.alphabet))],
                "states": self.num_states, "initial": 0,
                "accepting": sorted(self.accepting),
                "transitions": [[s, self.symbol_name(sym), t]
                                for s, row in enumerate(self.delta) for sym, t in row]}

    def to_dot(self) -> str:
        lines = [f'digraph "{self.name}_{self.context.id}" {{', "  rankdir=LR;"]
        for s in range(self.num_states):
            shape = "doublecircle" if s in self.accepting else "circle"
            lines.append(f"  q{s} [shape={shape}];")
        for s, row in enumerate(self.delta):
            for sym, t in row:
                lines.append(f'  q{s} -> q{t} [label="{self.symbol_name(sym)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_automaton(ax: Axiom, cxt: Context, stages: Sequence[str],
                    cap: Optional[int] = None) -> AxiomAutomaton:
    if not ax.universal:
        raise UnsupportedAxiom(f"axiom {ax.name!r} is not universal")
    return _build(ax.name, ax.variables, ax.matrix, cxt, tuple(stages),
                  cap if cap is not None else event_cap(DEFAULT_ALPHABET_CAP))


@lru_cache(maxsize=4096)
def _build(name: str, variables: tuple, matrix: Formula, cxt: Context, stages: tuple,
           cap: int) -> AxiomAutomaton:
    alphabet = symbolic_alphabet(matrix, variables, stages)
    n = len(alphabet)
    if n > cap:
        raise CapExceeded(f"axiom {name!r} has {n} alphabet events; cap is {cap}")
    index = {e: k for k, e in enumerate(alphabet)}
    ctx = dict(zip(cxt.atoms, cxt.values))
    registry: dict = {}
    keys: list = []
    pos = [0] * n
    used = [False] * n

    def node(depth: int):
        if depth == n:
            if not _eval_symbolic(matrix, pos, index, ctx):
                return None
            key = (True, ())
        else:
            trans = []
            for sym in range(n):
                if used[sym]:
                    continue
                used[sym] = True
                pos[sym] = depth
                child = node(depth + 1)
                used[sym] = False
                if child is not None:
                    trans.append((sym, child))
            if not trans:
                return None
            key = (False, tuple(trans))
        nid = registry.get(key)
        if nid is None:
            nid = registry[key] = len(keys)
            keys.append(key)
        return nid

    root = node(0)
    if root is None:
        return AxiomAutomaton(name, cxt, variables, alphabet, ((),), frozenset())
    # renumber breadth-first from the root
    order = {root: 0}
    queue = [root]
    for q in queue:
        for _, t in keys[q][1]:
            if t not in order:
                order[t] = len(order)
                queue.append(t)
    delta = [None] * len(order)
    accepting = set()
    for old, new in order.items():
        acc, trans = keys[old]
        if acc:
            accepting.add(new)
        delta[new] = tuple((sym, order[t]) for sym, t in trans)
    return AxiomAutomaton(name, cxt, variables, alphabet, tuple(delta), frozenset(accepting))


def synthesize(axiom_set: AxiomSet, ax: Axiom, domain: Optional[OperationDomain] = None,
               contexts: Optional[Sequence[int]] = None, cap: Optional[int] = None
               ) -> list[AxiomAutomaton]:
    """Automata for the requested (default: all consistent) contexts."""
    cxts = enumerate_contexts(ax)
    if contexts is not None:
        for k in contexts:
            if not 0 <= k < len(cxts):
                raise ConfigError(f"context id {k} out of range 0..{len(cxts) - 1}")
        cxts = [cxts[k] for k in contexts]
    elif domain is not None:
        realized = realized_contexts(ax, axiom_set, domain)
        cxts = [c for c in cxts if c.values in realized]
    return [build_automaton(ax, c, axiom_set.stages.names, cap) for c in cxts]


# -- concretisation -----------------------------------------------------------


@dataclass(frozen=True)
class ConcreteAutomaton:
    automaton: AxiomAutomaton
    assignment: tuple[tuple[str, Instruction], ...]
    events: tuple[Event, ...]  # concrete alphabet, aligned with automaton symbols

    def symbol_of(self, e: Event) -> Optional[int]:
        try:
            return self.events.index(e)
        except ValueError:
            return None

    def accepts(self, trace: Sequence[Event]) -> bool:
        word = [self.symbol_of(e) for e in trace if e in self.events]
        return self.automaton.accepts(word)


def concretize(aut: AxiomAutomaton, assignment: Mapping[str, Instruction]) -> ConcreteAutomaton:
    if len(set(assignment.values())) != len(assignment):
        raise ConfigError("assignment must be injective")
    events = tuple(Event(assignment[v], st) for v, st in aut.alphabet)
    return ConcreteAutomaton(aut, tuple((v, assignment[v]) for v in aut.variables), events)


# -- monitor banks ------------------------------------------------------------


def quantifier_blocks(ax: Axiom) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
    """Split the prefix as forall-X exists-Y forall-Z."""
    blocks: list[list] = []
    for kind, v in ax.quantifiers:
        if not blocks or blocks[-1][0] != kind:
            blocks.append([kind, []])
        blocks[-1][1].append(v)
    kinds = [b[0] for b in blocks]
    if kinds == [FORALL]:
        return tuple(blocks[0][1]), (), ()
    shapes = {(EXISTS,): (None, 0, None), (FORALL, EXISTS): (0, 1, None),
              (EXISTS, FORALL): (None, 0, 1), (FORALL, EXISTS, FORALL): (0, 1, 2)}
    if tuple(kinds) not in shapes:
        raise UnsupportedAxiom(f"axiom {ax.name!r}: bounded monitoring supports "
                               "forall*-exists*-forall* prefixes only")
    xi, yi, zi = shapes[tuple(kinds)]
    pick = lambda i: tuple(blocks[i][1]) if i is not None else ()
    return pick(xi), pick(yi), pick(zi)


def _matrix_axiom(ax: Axiom) -> Axiom:
    return Axiom(ax.name, tuple((FORALL, v) for v in ax.variables), ax.matrix)


@dataclass
class _Group:
    axiom: str
    x: tuple[Instruction, ...]
    ys: list  # list of y tuples
    autos_by_y: list  # list[list[int]]


class MonitorBank:
    """Concrete automata for every instantiation of a program's axioms.

    Universal axioms get one monitor per injective assignment.  For a
    ``forall X exists Y forall Z`` axiom, a *cell* is an ``(X, Z)`` pair
    holding one automaton per witness choice ``Y``; ``X`` is satisfied while
    some ``Y`` has no dead automaton in any of its cells.  In ``pairs``
    counting, ``Z`` ranges over all tuples and cells whose ``Z`` overlaps
    ``X`` are vacuous.
    """

    def __init__(self, axiom_set: AxiomSet, program: Program, counting: str = "distinct",
                 instrs: Optional[Sequence[Instruction]] = None, cap: Optional[int] = None):
        if counting not in ("distinct", "pairs"):
            raise ConfigError(f"unknown counting mode {counting!r}")
        self.axiom_set = axiom_set
        instrs = tuple(instrs if instrs is not None else program.instrs())
        interp = interpretation(axiom_set, program)
        stages = axiom_set.stages.names
        self.autos: list[ConcreteAutomaton] = []
        self.group_of: list[int] = []
        self.groups: list[_Group] = []
        self.cells: list[tuple[str, tuple, tuple]] = []
        self.index: dict[Event, list[tuple[int, int]]] = {}
        self.doomed: Optional[tuple[str, tuple]] = None
        for ax in axiom_set.axioms:
            xs, ys, zs = quantifier_blocks(ax)
            max_ax = _matrix_axiom(ax)
            for x in itertools.permutations(instrs, len(xs)):
                rest = [i for i in instrs if i not in x]
                ycands = list(itertools.permutations(rest, len(ys)))
                if counting == "pairs":
                    ztuples = list(itertools.product(instrs, repeat=len(zs)))
                else:
                    ztuples = list(itertools.permutations(rest, len(zs)))
                if zs or not ys:
                    for z in ztuples:
                        self.cells.append((ax.name, x, z))
                else:
                    self.cells.append((ax.name, x, ()))
                g = _Group(ax.name, x, ycands, [[] for _ in ycands])
                gid = len(self.groups)
                self.groups.append(g)
                if not ycands and self.doomed is None:
                    self.doomed = (ax.name, x)
                for yk, y in enumerate(ycands):
                    for z in ztuples:
                        if len(set(x + y + z)) != len(x + y + z):
                            continue
                        env = dict(zip(xs + ys + zs, x + y + z))
                        cxt = context_of(max_ax, env, interp)
                        aut = _build(ax.name, max_ax.variables, ax.matrix, cxt, stages,
                                     cap if cap is not None else event_cap(DEFAULT_ALPHABET_CAP))
                        ca = concretize(aut, env)
                        aid = len(self.autos)
                        self.autos.append(ca)
                        self.group_of.append(gid)
                        g.autos_by_y[yk].append(aid)
                        for sym, e in enumerate(ca.events):
                            self.index.setdefault(e, []).append((aid, sym))
        self._trans = [a.automaton.trans() for a in self.autos]

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    def initial(self) -> Optional[tuple]:
        if self.doomed is not None:
            return None
        return tuple(0 for _ in self.autos)

    def _group_alive(self, state: Sequence, gid: int) -> bool:
        return any(all(state[a] is not None for a in autos) for autos in self.groups[gid].autos_by_y)

    def step(self, state: tuple, e: Event) -> Optional[tuple]:
        """Consume one event; ``None`` when some axiom instance can no longer hold."""
        hits = self.index.get(e)
        if not hits:
            return state
        new = list(state)
        touched = set()
        for aid, sym in hits:
            s = new[aid]
            if s is None:
                continue
            ns = self._trans[aid][s].get(sym)
            new[aid] = ns
            if ns is None:
                touched.add(self.group_of[aid])
        for gid in sorted(touched):
            if not self._group_alive(new, gid):
                self.rejected = (self.groups[gid].axiom, self.groups[gid].x)
                return None
        return tuple(new)

    def run(self, trace: Sequence[Event]) -> tuple[Optional[tuple], int]:
        """Feed a trace; returns the final state and how many events were consumed."""
        st = self.initial()
        if st is None:
            self.rejected = self.doomed
            return None, 0
        for k, e in enumerate(trace):
            st = self.step(st, e)
            if st is None:
                return None, k + 1
        return st, len(trace)

    def accepts_final(self, state: Optional[tuple]) -> bool:
        if state is None:
            return False
        for gid, g in enumerate(self.groups):
            ok = False
            for autos in g.autos_by_y:
                if all(state[a] is not None and state[a] in self.autos[a].automaton.accepting
                       for a in autos):
                    ok = True
                    break
            if not ok:
                self.rejected = (g.axiom, g.x)
                return False
        return True

    def active(self, state: tuple) -> list[int]:
        return [a for a, s in enumerate(state)
                if s is not None and self.autos[a].automaton.is_active(s)]


def instantiate_bank(axiom_set: AxiomSet, program: Program, counting: str = "distinct",
                     instrs: Optional[Sequence[Instruction]] = None) -> MonitorBank:
    return MonitorBank(axiom_set, program, counting, instrs)


def monitor_count(ax: Axiom, n: int, counting: str = "distinct") -> int:
    """Number of monitor cells for one axiom over ``n`` instructions."""
    xs, ys, zs = quantifier_blocks(ax)
    cells_x = math.perm(n, len(xs))
    if not zs:
        return cells_x
    if counting == "pairs":
        return cells_x * n ** len(zs)
    return cells_x * math.perm(n - len(xs), len(zs))


# -- ground evaluation --------------------------------------------------------


def ground_formula(ax: Axiom, instrs: Sequence[Instruction]):
    """Quantifier-free expansion as nested ('and'|'or', [children]) / (env, matrix) leaves."""
    def go(k, env, used):
        if k == len(ax.quantifiers):
            return ("leaf", dict(env))
        kind, v = ax.quantifiers[k]
        kids = []
        for i in instrs:
            if i in used:
                continue
            env[v] = i
            kids.append(go(k + 1, env, used | {i}))
            del env[v]
        return ("and" if kind == FORALL else "or", kids)
    return go(0, {}, frozenset())


def _ground_matrix(f: Formula, env, pos, interp) -> bool:
    if isinstance(f, Hb):
        a, b = Event(env[f.v1], f.s1), Event(env[f.v2], f.s2)
        return a != b and pos[a] < pos[b]
    if isinstance(f, (RefOrder, PredAtom)):
        return atom_value(f, env, interp)
    if isinstance(f, Not):
        return not _ground_matrix(f.arg, env, pos, interp)
    if isinstance(f, And):
        return _ground_matrix(f.left, env, pos, interp) and _ground_matrix(f.right, env, pos, interp)
    if isinstance(f, Or):
        return _ground_matrix(f.left, env, pos, interp) or _ground_matrix(f.right, env, pos, interp)
    return (not _ground_matrix(f.left, env, pos, interp)) or _ground_matrix(f.right, env, pos, interp)


def ground_eval(axiom_set: AxiomSet, program: Program, trace: Sequence[Event]) -> tuple[bool, Optional[str]]:
    """Check a complete trace by expanding quantifiers over the program's
    instructions; returns (holds, first failing axiom)."""
    pos = {e: k for k, e in enumerate(trace)}
    interp = interpretation(axiom_set, program)
    instrs = program.instrs()
    for ax in axiom_set.axioms:
        def val(node):
            tag, body = node
            if tag == "leaf":
                return _ground_matrix(ax.matrix, body, pos, interp)
            if tag == "and":
                return all(val(c) for c in body)
            return any(val(c) for c in body)
        if not val(ground_formula(ax, instrs)):
            return False, ax.name
    return True, None
