"""Trace analysis, t-boundedness and the operational model.

The machine keeps, per core, a window ``U(c)`` of in-progress instructions
and the unread rest of the stream ``V(c)``.  Instructions are fetched
lazily (when one of their events, or a later instruction's, is scheduled)
and dropped eagerly once the head of the window has completed, so the
window always equals the set of in-progress instructions.  Each scheduled
event must keep the partial trace t-bounded and must not be rejected by the
monitors.

Two monitor disciplines are available:

* finite (default, universal axioms only): monitors are spawned when their
  last instruction is fetched, over instructions still retained, and
  retired as soon as every completion is accepted.  Completed instructions
  are forgotten once they are no longer coupled, within K steps, to an
  in-progress instruction (K = largest axiom arity).
* bounded: one static bank over every instantiation in the program; this
  handles forall-exists-forall axioms too.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .automata import MonitorBank, _build, concretize, context_of
from .core import DEFAULT_ALPHABET_CAP, Event, Instruction, Program, event_cap
from .errors import ConfigError, UnsupportedAxiom
from .lang import AxiomSet, bind, interpretation

# -- trace analysis -----------------------------------------------------------


class TraceAnalysis:
    """Start/end indices (1-based), prefix ends and coupling for a complete trace."""

    def __init__(self, trace: Sequence[Event], program: Program):
        self.trace = tuple(trace)
        self.program = program
        self.instrs = program.instrs()
        self.start: dict[Instruction, int] = {}
        self.end: dict[Instruction, int] = {}
        for k, e in enumerate(self.trace, 1):
            self.start.setdefault(e.instr, k)
            self.end[e.instr] = k
        missing = [i for i in self.instrs if i not in self.start]
        if missing:
            raise ConfigError(f"trace has no events of {missing[0]}")
        self.pfxend = {i: max(self.end[j] for j in self.instrs
                              if j.core == i.core and j.label <= i.label)
                       for i in self.instrs}
        self._events_of = {i: [e for e in self.trace if e.instr == i] for i in self.instrs}

    def coup(self, a: Instruction, b: Instruction) -> bool:
        return self.start[a] <= self.pfxend[b] and self.start[b] <= self.pfxend[a]

    def CM(self, j: int) -> set:
        return {i for i in self.instrs if self.end[i] <= j}

    def NF(self, j: int) -> set:
        return {i for i in self.instrs if self.start[i] > j}

    def pCM(self, j: int) -> set:
        cm = self.CM(j)
        return {i for i in self.instrs
                if all(k in cm for k in self.instrs if k.core == i.core and k.label <= i.label)}

    def pNF(self, j: int) -> set:
        nf = self.NF(j)
        return {i for i in self.instrs
                if all(k in nf for k in self.instrs if k.core == i.core and k.label >= i.label)}

    def IP(self, j: int) -> set:
        return set(self.instrs) - self.pCM(j) - self.pNF(j)

    def coupled(self, a: Instruction, b: Instruction, k: int) -> bool:
        """A chain of at most k coupling links from a to b."""
        frontier, seen = {a}, {a}
        for _ in range(k):
            frontier = {n for f in frontier for n in self.instrs if n not in seen and self.coup(f, n)}
            seen |= frontier
        return b in seen

    def AC(self, k: int, j: int) -> set:
        ip = self.IP(j)
        return {i for i in self.pCM(j) | ip if any(self.coupled(i, p, k) for p in ip)}


def analyze(trace: Sequence[Event], program: Program) -> TraceAnalysis:
    return TraceAnalysis(trace, program)


@dataclass(frozen=True)
class BoundViolation:
    condition: int  # 1: reordered beyond t; 2: coupled beyond t
    first: Instruction
    second: Instruction
    via: Optional[Instruction] = None

    def describe(self) -> str:
        if self.condition == 1:
            return f"{self.second} overtakes {self.first} by at least t"
        return f"{self.first} and {self.second} are coupled through {self.via}"


def t_violation(trace: Sequence[Event], program: Program, t: int) -> Optional[BoundViolation]:
    a = analyze(trace, program)
    same_core = [(x, y) for x in a.instrs for y in a.instrs if x.core == y.core and x != y]
    for x, y in same_core:
        if y.label - x.label >= t and a.start[y] < a.end[x]:
            return BoundViolation(1, x, y)
    for x, y in same_core:
        if x.label < y.label and y.label - x.label >= t:
            for m in a.instrs:
                if a.coup(x, m) and a.coup(m, y):
                    return BoundViolation(2, x, y, m)
    return None


def is_t_bounded(trace: Sequence[Event], program: Program, t: int) -> bool:
    return t_violation(trace, program, t) is None


def min_bound(trace: Sequence[Event], program: Program) -> int:
    t = 1
    while not is_t_bounded(trace, program, t):
        t += 1
    return t


def state_footprint(axiom_set: AxiomSet, t: int, num_cores: int) -> dict:
    """Size bounds for the finite-state model."""
    K = axiom_set.max_arity
    ip = num_cores * t

    def tk(k: int) -> int:
        return t * (k + 2) - 2

    out = {"history": t, "in_progress": ip, "K": K, "t_K": tk(K)}
    if 2 * K - 3 >= 1:
        out["retained"] = ip * num_cores * tk(2 * K - 3)
    else:
        out["retained"] = ip  # single-instruction axioms never need older instructions
    return out


# -- the abstract machine -----------------------------------------------------


@dataclass(frozen=True)
class Right:
    core: int


@dataclass(frozen=True)
class Stay:
    pass


@dataclass(frozen=True)
class Sched:
    core: int
    index: int  # 1-based position in U(core)
    stage: str


@dataclass(frozen=True)
class Drop:
    core: int
    index: int


Action = (Right, Stay, Sched, Drop)


class MachineError(ConfigError):
    pass


@dataclass(frozen=True)
class Configuration:
    U: tuple[tuple[Instruction, ...], ...]
    V: tuple[tuple[Instruction, ...], ...]
    done: frozenset = frozenset()

    @classmethod
    def initial(cls, program: Program) -> "Configuration":
        instrs = program.instrs()
        return cls(tuple(() for _ in range(program.num_cores)),
                   tuple(tuple(i for i in instrs if i.core == c) for c in range(program.num_cores)))

    @property
    def final(self) -> bool:
        return not any(self.U) and not any(self.V)


def step(cfg: Configuration, action, stages: Sequence[str], h: int
         ) -> tuple[Configuration, Optional[Event]]:
    """One machine transition; returns the new configuration and the emitted event."""
    U, V = list(cfg.U), list(cfg.V)
    if isinstance(action, Stay):
        return cfg, None
    c = action.core
    if not 0 <= c < len(U):
        raise MachineError(f"no core {c}")
    if isinstance(action, Right):
        if not V[c]:
            raise MachineError(f"core {c}: nothing left to fetch")
        if len(U[c]) >= h:
            raise MachineError(f"core {c}: history overflow (|U| = {h})")
        U[c] = U[c] + (V[c][0],)
        V[c] = V[c][1:]
        return Configuration(tuple(U), tuple(V), cfg.done), None
    if not 1 <= action.index <= len(U[c]):
        raise MachineError(f"core {c}: no window slot {action.index}")
    instr = U[c][action.index - 1]
    if isinstance(action, Sched):
        e = Event(instr, action.stage)
        if action.stage not in stages or e in cfg.done:
            raise MachineError(f"cannot schedule {e}")
        return Configuration(cfg.U, cfg.V, cfg.done | {e}), e
    if any(Event(instr, st) not in cfg.done for st in stages):
        raise MachineError(f"cannot drop incomplete {instr}")
    U[c] = U[c][:action.index - 1] + U[c][action.index:]
    done = frozenset(e for e in cfg.done if e.instr != instr)
    return Configuration(tuple(U), tuple(V), done), None


def actions_for(trace: Sequence[Event], program: Program, stages: Sequence[str]) -> list:
    """The lazy-fetch, eager-drop action sequence that emits ``trace``."""
    cfg = Configuration.initial(program)
    out = []
    done = set()
    for e in trace:
        c = e.instr.core
        while e.instr not in cfg.U[c]:
            out.append(Right(c))
            cfg = Configuration(tuple(u + (v[0],) if k == c else u for k, (u, v) in enumerate(zip(cfg.U, cfg.V))),
                                tuple(v[1:] if k == c else v for k, v in enumerate(cfg.V)))
        out.append(Sched(c, cfg.U[c].index(e.instr) + 1, e.stage))
        done.add(e)
        while cfg.U[c] and all(Event(cfg.U[c][0], st) in done for st in stages):
            out.append(Drop(c, 1))
            cfg = Configuration(tuple(u[1:] if k == c else u for k, u in enumerate(cfg.U)), cfg.V)
    return out


def replay(trace: Sequence[Event], program: Program, stages: Sequence[str], h: int
           ) -> list[Configuration]:
    """Run ``trace`` through the machine; configurations after each event's drops."""
    cfg = Configuration.initial(program)
    snaps = []
    emitted = []
    actions = actions_for(trace, program, stages)
    for k, act in enumerate(actions):
        cfg, e = step(cfg, act, stages, h)
        if e is not None:
            emitted.append(e)
        nxt = actions[k + 1] if k + 1 < len(actions) else None
        if e is not None or isinstance(act, Drop):
            if not isinstance(nxt, Drop):
                snaps.append(cfg)
    if tuple(emitted) != tuple(trace):
        raise MachineError("replay emitted a different trace")
    return snaps


# -- exploration --------------------------------------------------------------


@dataclass
class LoopStats:
    traces: int = 0
    nodes: int = 0
    pruned_by_monitor: int = 0
    pruned_by_t: int = 0
    failed_runs: int = 0
    peak_in_progress: int = 0
    peak_monitors: int = 0
    retained_active_forgotten: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class LoopResult:
    traces: list
    stats: LoopStats
    mode: str
    t: int
    bounded: bool

    def trace_set(self) -> set:
        return set(self.traces)


class _State:
    __slots__ = ("mask", "adj", "mon", "record", "retained")

    def __init__(self, mask, adj, mon, record=(), retained=0):
        self.mask = mask
        self.adj = adj
        self.mon = mon
        self.record = record
        self.retained = retained


class OperationalModel:
    def __init__(self, axiom_set: AxiomSet, program: Program, t: int, bounded: bool = False,
                 counting: str = "distinct"):
        if t < 1:
            raise ConfigError("t must be at least 1")
        self.axiom_set = bind(axiom_set, program)
        self.program = program
        self.t = t
        self.bounded = bounded
        self.stages = self.axiom_set.stages.names
        S = self.S = len(self.stages)
        instrs = self.instrs = program.instrs()
        self.N = len(instrs)
        self.idx = {i: k for k, i in enumerate(instrs)}
        self.core = [i.core for i in instrs]
        self.pos = [i.label - program.offset(i.core) for i in instrs]
        self.by_core = [[k for k, i in enumerate(instrs) if i.core == c] for c in range(program.num_cores)]
        self.fm = [((1 << S) - 1) << (k * S) for k in range(self.N)]
        self.full = (1 << (S * self.N)) - 1
        self.events = [Event(instrs[k], self.stages[s]) for k in range(self.N) for s in range(S)]
        self.stats = LoopStats()
        if bounded:
            self.bank = MonitorBank(self.axiom_set, program, counting)
        else:
            if not self.axiom_set.universal:
                raise UnsupportedAxiom("the finite-state model needs universal axioms; "
                                       "use bounded monitoring")
            self.K = max(1, self.axiom_set.max_arity)
            self.interp = interpretation(self.axiom_set, program)
            self.cap = event_cap(DEFAULT_ALPHABET_CAP)
            self._autcache: dict = {}

    # -- helpers on masks

    def _complete(self, mask: int, k: int) -> bool:
        return mask & self.fm[k] == self.fm[k]

    def _windows(self, mask: int) -> tuple[list[int], list[int]]:
        """Commit point and fetch point (positions) per core."""
        cps, fps = [], []
        for lst in self.by_core:
            cp = 0
            while cp < len(lst) and self._complete(mask, lst[cp]):
                cp += 1
            fp = cp
            for p in range(len(lst) - 1, cp - 1, -1):
                if mask & self.fm[lst[p]]:
                    fp = p + 1
                    break
            cps.append(cp)
            fps.append(fp)
        return cps, fps

    def initial(self) -> _State:
        adj = (0,) * self.N
        if self.bounded:
            return _State(0, adj, self.bank.initial())
        return _State(0, adj, ())

    def key(self, st: _State, cps, fps):
        started = [st.mask & self.fm[k] != 0 for k in range(self.N)]
        open_ = tuple(k for k in range(self.N) if started[k] and self.pos[k] >= cps[self.core[k]])
        if self.bounded:
            return (st.mask, tuple(st.adj[k] for k in open_), st.mon)
        r = st.retained
        return (st.mask, tuple(st.adj[k] & r for k in range(self.N) if r >> k & 1),
                st.record, st.mon)

    # -- finite-mode monitors

    def _automata_for(self, assignment: tuple[int, ...], ax_i: int):
        key = (ax_i, assignment)
        hit = self._autcache.get(key)
        if hit is None:
            ax = self.axiom_set.axioms[ax_i]
            env = {v: self.instrs[k] for v, k in zip(ax.variables, assignment)}
            cxt = context_of(ax, env, self.interp)
            aut = _build(ax.name, ax.variables, ax.matrix, cxt, self.stages, self.cap)
            ca = concretize(aut, env)
            evmap = {self.idx[e.instr] * self.S + self.stages.index(e.stage): sym
                     for sym, e in enumerate(ca.events)}
            hit = self._autcache[key] = (aut, evmap)
        return hit

    def _spawn(self, new: int, retained: int, record, live: dict) -> bool:
        """Spawn monitors whose last instruction is ``new``; False on rejection."""
        pool = [k for k in range(self.N) if retained >> k & 1 and k != new]
        for ax_i, ax in enumerate(self.axiom_set.axioms):
            n = ax.arity
            for slot in range(n):
                for others in _injective(pool, n - 1):
                    assignment = others[:slot] + (new,) + others[slot:]
                    aut, evmap = self._automata_for(assignment, ax_i)
                    s = 0
                    trans = aut.trans()
                    for e in record:
                        sym = evmap.get(e)
                        if sym is not None:
                            s = trans[s].get(sym)
                            if s is None:
                                return False
                    if aut.full()[s]:
                        continue
                    live[(ax_i, assignment)] = s
        return True

    def _ac(self, mask: int, adj, cps, fps) -> int:
        """In-progress instructions plus completed ones K-coupled to them."""
        ip = 0
        cand = 0
        for c, lst in enumerate(self.by_core):
            for p in range(fps[c]):
                cand |= 1 << lst[p]
                if p >= cps[c]:
                    ip |= 1 << lst[p]
        reach = ip
        frontier = ip
        for _ in range(self.K):
            nxt = 0
            for k in range(self.N):
                if frontier >> k & 1:
                    nxt |= adj[k]
            nxt &= ~reach
            if not nxt:
                break
            reach |= nxt
            frontier = nxt
        return (reach & cand) | ip

    # -- successor relation

    def _context(self, st: _State):
        mask = st.mask
        cps, fps = self._windows(mask)
        started = [mask & self.fm[k] != 0 for k in range(self.N)]
        open_mask = 0
        for k in range(self.N):
            if started[k] and self.pos[k] >= cps[self.core[k]]:
                open_mask |= 1 << k
        return cps, fps, started, open_mask

    def _try(self, st: _State, ctx, x: int, s: int) -> tuple[Optional[_State], str]:
        """Schedule stage ``s`` of instruction ``x``; the reason on refusal."""
        cps, fps, started, open_mask = ctx
        e = x * self.S + s
        c, p = self.core[x], self.pos[x]
        cp, fp = cps[c], fps[c]
        if st.mask >> e & 1:
            return None, "repeated"
        if p - cp >= self.t:
            return None, "history"
        # an already-started instruction t or more positions later
        if fp - 1 >= p + self.t:
            return None, "t"
        adj = st.adj
        if not started[x]:
            nb = open_mask | (1 << x)
            if self._coupling_violation(nb, x, adj):
                return None, "t"
            adj = list(adj)
            for m in range(self.N):
                if nb >> m & 1:
                    adj[m] |= 1 << x
            adj[x] = nb
            adj = tuple(adj)
        child = self._advance(st, x, c, p, fp, e, adj, cps, fps)
        if child is None:
            return None, "monitor"
        return child, ""

    def successors(self, st: _State) -> Iterator[tuple[int, _State]]:
        """Enabled events in core, window position, stage order."""
        ctx = self._context(st)
        cps = ctx[0]
        for c, lst in enumerate(self.by_core):
            for p in range(cps[c], min(len(lst), cps[c] + self.t)):
                x = lst[p]
                for s in range(self.S):
                    if st.mask >> (x * self.S + s) & 1:
                        continue
                    child, why = self._try(st, ctx, x, s)
                    if child is None:
                        if why == "t":
                            self.stats.pruned_by_t += 1
                        else:
                            self.stats.pruned_by_monitor += 1
                        continue
                    yield x * self.S + s, child

    def run_trace(self, trace: Sequence[Event]) -> tuple[bool, Optional[int], str]:
        """Drive the model along ``trace``: (accepted, failing index, reason)."""
        st = self.initial()
        if st.mon is None and self.bounded:
            return False, 0, "monitor"
        sidx = {name: k for k, name in enumerate(self.stages)}
        for k, ev in enumerate(trace):
            x = self.idx.get(ev.instr)
            if x is None or ev.stage not in sidx:
                return False, k, "foreign event"
            st, why = self._try(st, self._context(st), x, sidx[ev.stage])
            if st is None:
                return False, k, why
        if st.mask != self.full:
            return False, len(trace), "incomplete"
        if self.bounded and not self.bank.accepts_final(st.mon):
            return False, len(trace), "monitor"
        return True, None, ""

    def _coupling_violation(self, nb: int, x: int, adj) -> bool:
        t = self.t
        members = [m for m in range(self.N) if nb >> m & 1]
        for a in members:
            for b in members:
                if a < b and self.core[a] == self.core[b] and abs(self.pos[a] - self.pos[b]) >= t:
                    return True
        cx, px = self.core[x], self.pos[x]
        for m in members:
            reach = adj[m] | nb if m != x else nb
            for b in range(self.N):
                if reach >> b & 1 and self.core[b] == cx and abs(self.pos[b] - px) >= t:
                    return True
        return False

    def _advance(self, st: _State, x, c, p, fp, e, adj, cps, fps) -> Optional[_State]:
        mask = st.mask | (1 << e)
        if self.bounded:
            mon = self.bank.step(st.mon, self.events[e])
            if mon is None:
                return None
            return _State(mask, adj, mon)
        live = dict(st.mon)
        retained = st.retained
        record = st.record
        lst = self.by_core[c]
        for q in range(fp, p + 1):
            new = lst[q]
            retained |= 1 << new
            if not self._spawn(new, retained, record, live):
                return None
        record = record + (e,)
        for mk, s in list(live.items()):
            aut, evmap = self._automata_for(mk[1], mk[0])
            sym = evmap.get(e)
            if sym is None:
                continue
            ns = aut.trans()[s].get(sym)
            if ns is None:
                return None
            if aut.full()[ns]:
                del live[mk]
            else:
                live[mk] = ns
        ncps, nfps = cps, fps
        if self._complete(mask, lst[cps[c]]):
            ncps, nfps = self._windows(mask)
            keep = self._ac(mask, adj, ncps, nfps)
            if keep != retained:
                for mk in list(live):
                    if any(not keep >> k & 1 for k in mk[1]):
                        self.stats.retained_active_forgotten += 1
                record = tuple(ev for ev in record if keep >> (ev // self.S) & 1)
                retained = keep
        return _State(mask, adj, tuple(sorted(live.items())), record, retained)

    def _observe(self, st: _State):
        cps, fps = self._windows(st.mask)
        ip = sum(f - c for c, f in zip(cps, fps))
        self.stats.peak_in_progress = max(self.stats.peak_in_progress, ip)
        if self.bounded:
            act = len(self.bank.active(st.mon)) if st.mon is not None else 0
        else:
            act = len(st.mon)
        self.stats.peak_monitors = max(self.stats.peak_monitors, act)
        return cps, fps

    # -- drivers

    def explore(self, memoize: bool = True, first: Optional[Event] = None) -> LoopResult:
        """Exhaustive exploration; traces in deterministic DFS order.

        With ``memoize`` off every node is expanded separately (the plain
        search tree), which is only useful for cross-checking.  ``first``
        restricts the search to traces starting with that event, which
        partitions the work between independent workers.
        """
        first_id = None
        if first is not None:
            first_id = self.idx[first.instr] * self.S + self.stages.index(first.stage)
        memo: dict = {}
        fresh = iter(range(1 << 62))
        root = self.initial()
        if root.mon is None and self.bounded:
            return LoopResult([], self.stats, "exhaustive", self.t, self.bounded)

        def visit(st: _State):
            cps, fps = self._observe(st)
            k = self.key(st, cps, fps) if memoize else next(fresh)
            if k in memo:
                return k
            self.stats.nodes += 1
            if st.mask == self.full:
                ok = not self.bounded or self.bank.accepts_final(st.mon)
                memo[k] = (ok, ())
                return k
            kids = []
            for e, child in self.successors(st):
                if first_id is not None and st.mask == 0 and e != first_id:
                    continue
                ck = visit(child)
                if memo[ck][0]:
                    kids.append((e, ck))
            memo[k] = (bool(kids), tuple(kids))
            return k

        rk = visit(root)
        traces = list(_paths(memo, rk, self.events, []))
        self.stats.traces = len(traces)
        return LoopResult(traces, self.stats, "exhaustive", self.t, self.bounded)

    def sample(self, seed: int, n: int) -> LoopResult:
        """``n`` random runs; accepted runs contribute their traces."""
        rng = random.Random(seed)
        traces = []
        for _ in range(n):
            st = self.initial()
            if st.mon is None and self.bounded:
                self.stats.failed_runs += 1
                continue
            out = []
            while st.mask != self.full:
                self._observe(st)
                succ = list(self.successors(st))
                if not succ:
                    break
                e, st = succ[rng.randrange(len(succ))]
                out.append(self.events[e])
            if st.mask == self.full and (not self.bounded or self.bank.accepts_final(st.mon)):
                traces.append(tuple(out))
            else:
                self.stats.failed_runs += 1
        self.stats.traces = len(traces)
        return LoopResult(traces, self.stats, "random", self.t, self.bounded)


def _injective(pool: Sequence[int], n: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for k, a in enumerate(pool):
        for rest in _injective(pool[:k] + pool[k + 1:], n - 1):
            yield (a,) + rest


def _paths(memo: dict, node, events, prefix: list) -> Iterator[tuple[Event, ...]]:
    ok, kids = memo[node]
    if not ok:
        return
    if not kids:
        yield tuple(events[e] for e in prefix)
        return
    for e, child in kids:
        prefix.append(e)
        yield from _paths(memo, child, events, prefix)
        prefix.pop()


def operational_loop(axiom_set: AxiomSet, program: Program, t: int, mode: str = "exhaustive",
                     seed: int = 0, count: int = 100, bounded: bool = False,
                     counting: str = "distinct", memoize: bool = True) -> LoopResult:
    model = OperationalModel(axiom_set, program, t, bounded, counting)
    if mode == "exhaustive":
        return model.explore(memoize)
    if mode == "random":
        return model.sample(seed, count)
    raise ConfigError(f"unknown mode {mode!r}")


@dataclass
class GeneratorCheck:
    passed: bool
    witness: Optional[tuple[Event, ...]]
    failed_axiom: Optional[str]
    states: int


def _complete(generator, state) -> tuple[Event, ...]:
    tail = []
    while not generator.final(state):
        e, state = generator.moves(state)[0]
        tail.append(e)
    return tuple(tail)


def check_generator(axiom_set: AxiomSet, program: Program, generator,
                    counting: str = "distinct") -> GeneratorCheck:
    """Run every trace of ``generator`` against a monitor bank.

    ``generator`` exposes ``initial()``, ``moves(state)`` returning
    ``(event, next_state)`` pairs and ``final(state)``.  The product of
    generator state and bank state is explored with memoisation, so the
    interleaving blow-up of multi-core generators stays manageable.
    """
    bank = MonitorBank(bind(axiom_set, program), program, counting)
    seen: set = set()
    path: list[Event] = []

    def go(gs, ms):
        key = (gs, ms)
        if key in seen:
            return None
        seen.add(key)
        if generator.final(gs):
            if not bank.accepts_final(ms):
                return tuple(path), bank.rejected[0]
            return None
        for e, nxt in generator.moves(gs):
            path.append(e)
            nm = bank.step(ms, e)
            if nm is None:
                # complete the rejected prefix so the witness is a full trace
                out = tuple(path) + _complete(generator, nxt), bank.rejected[0]
                path.pop()
                return out
            bad = go(nxt, nm)
            path.pop()
            if bad is not None:
                return bad
        return None

    init = bank.initial()
    if init is None:
        return GeneratorCheck(False, (), bank.doomed[0], 0)
    bad = go(generator.initial(), init)
    if bad is None:
        return GeneratorCheck(True, None, None, len(seen))
    return GeneratorCheck(False, bad[0], bad[1], len(seen))
