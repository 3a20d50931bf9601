import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from uspecop import corpus
from uspecop.automata import (MonitorBank, build_automaton, concretize, context_of,
                              enumerate_contexts, ground_eval, is_consistent, monitor_count,
                              quantifier_blocks, realized_contexts, synthesize)
from uspecop.core import Event, events_of
from uspecop.errors import CapExceeded, UnsupportedAxiom
from uspecop.lang import bind, interpretation, parse_axioms
from uspecop.uhb import eval_matrix, is_valid_trace

UNIVERSAL = ["a_sharp", "fig3", "fig3_core", "pipeline", "inorder_commit", "dep_order",
             "same_addr", "core_total", "example1", "reversed", "example2"]


def _realized(name):
    s = corpus.axioms(name)
    dom = corpus.program("example2a" if name == "example2" else "domain4")
    s = bind(s, dom) if name != "store_table" else bind(s, dom)
    for ax in s.axioms:
        for values, tup in realized_contexts(ax, s, dom.domain).items():
            yield s, dom, ax, values, tup


def _brute_words(ax, aut, tup, interp):
    """Accepted symbol words, by evaluating the matrix on concrete instructions."""
    env = dict(zip(ax.variables, tup))
    evs = [Event(env[v], stage) for v, stage in aut.alphabet]
    out = set()
    for perm in itertools.permutations(range(len(evs))):
        pos = {evs[s]: k for k, s in enumerate(perm)}
        if eval_matrix(ax.matrix, env, lambda a, b: a != b and pos[a] < pos[b], interp):
            out.add(perm)
    return out


CASES = [(n, ax.name, values) for n in UNIVERSAL for _, _, ax, values, _ in _realized(n)]


@pytest.mark.parametrize("name,axname,values", CASES)
def test_language_equals_brute_force(name, axname, values):
    for s, dom, ax, vals, tup in _realized(name):
        if ax.name != axname or vals != values:
            continue
        cxt = context_of(ax, dict(zip(ax.variables, tup)), interpretation(s, dom))
        aut = build_automaton(ax, cxt, s.stages.names)
        assert aut.language() == _brute_words(ax, aut, tup, interpretation(s, dom))


def _residuals(aut):
    trans = aut.trans()
    memo = {}

    def lang(q):
        if q not in memo:
            words = {()} if q in aut.accepting else set()
            for sym, r in trans[q].items():
                words |= {(sym,) + w for w in lang(r)}
            memo[q] = frozenset(words)
        return memo[q]
    return [lang(q) for q in range(aut.num_states)]


@pytest.mark.parametrize("name", UNIVERSAL)
def test_automata_are_minimal_and_trim(name):
    s = corpus.axioms(name)
    for ax in s.axioms:
        for cxt in enumerate_contexts(ax):
            aut = build_automaton(ax, cxt, s.stages.names)
            res = _residuals(aut)
            if not aut.accepting:
                assert aut.num_states == 1
                continue
            assert all(res), "every state reaches acceptance"
            assert len(set(res)) == len(res), "no two states are equivalent"
            n = len(aut.alphabet)
            depth = aut.depth()
            for q, words in enumerate(res):
                assert aut.full()[q] == (len(words) == len(list(
                    itertools.permutations(range(n - depth[q])))))


def test_assignment_independence(domain4):
    """Assignments agreeing on the context have the same relabelled language."""
    prog = corpus.program("fig5")
    s5 = bind(corpus.axioms("fig3_core"), prog)
    interp = interpretation(s5, prog)
    for ax in s5.axioms:
        for tup in itertools.permutations(prog.instrs(), ax.arity):
            env = dict(zip(ax.variables, tup))
            aut = build_automaton(ax, context_of(ax, env, interp), s5.stages.names)
            assert aut.language() == _brute_words(ax, aut, tup, interp)


def test_a_sharp_automata(a_sharp):
    ax0, ax1 = a_sharp.axioms
    a1 = build_automaton(ax1, enumerate_contexts(ax1)[0], a_sharp.stages.names)
    assert a1.alphabet == (("i1", "S"), ("i1", "T"), ("i2", "S"), ("i2", "T"))
    assert len(a1.language()) == 18
    assert a1.num_states == 17
    a0 = build_automaton(ax0, enumerate_contexts(ax0)[0], a_sharp.stages.names)
    assert a0.num_states == 3 and len(a0.language()) == 1
    doc = a1.to_json()
    assert doc["schema"] == 1 and doc["states"] == 17
    json.dumps(doc)
    assert a1.to_dot().startswith('digraph "ax1_0"')


def test_contexts_enumerate_by_bits(fig3):
    ax1 = fig3.axiom("ax1")
    cx = enumerate_contexts(ax1)
    assert len(cx) == 4
    assert [c.id for c in cx] == [0, 1, 2, 3]
    assert cx[1].values == (True, False)  # atom 0 is the first to occur (<r)


def test_consistency_filters_contexts(domain4):
    s = bind(corpus.axioms("fig3_core"), domain4)
    ax3 = s.axiom("ax3")
    # i1 <r i2 can be true or false
    assert all(is_consistent(c, ax3, s, domain4.domain) for c in enumerate_contexts(ax3))
    ax2 = s.axiom("ax2")
    assert len(synthesize(s, ax2, domain4.domain)) == 2


def test_alphabet_cap(monkeypatch):
    s = parse_axioms('stages: A, B\naxiom "big": forall a, b, c. hb(a.A, b.A) /\\ '
                     'hb(b.B, c.B) /\\ hb(c.A, a.B) /\\ hb(a.A, c.B)')
    ax = s.axioms[0]
    with pytest.raises(CapExceeded):
        build_automaton(ax, enumerate_contexts(ax)[0], s.stages.names, cap=4)
    monkeypatch.setenv("USPECOP_EVENT_CAP", "3")
    with pytest.raises(CapExceeded):
        build_automaton(ax, enumerate_contexts(ax)[0], s.stages.names)


def test_non_universal_automaton_rejected():
    rv = corpus.axioms("rv").axioms[0]
    with pytest.raises(UnsupportedAxiom):
        build_automaton(rv, enumerate_contexts(rv)[0], ("DX",))


def test_rv_bank_counts():
    s = corpus.axioms("rv")
    prog = corpus.program("rv4")
    assert quantifier_blocks(s.axioms[0]) == (("i1",), ("i2",), ("i3",))
    distinct = MonitorBank(bind(s, prog), prog, "distinct")
    pairs = MonitorBank(bind(s, prog), prog, "pairs")
    assert distinct.num_cells == 12 == monitor_count(s.axioms[0], 4, "distinct")
    assert pairs.num_cells == 16 == monitor_count(s.axioms[0], 4, "pairs")
    assert len(distinct.autos) == 24


def test_unsupported_prefix():
    s = parse_axioms('stages: S\naxiom "alt": forall a, exists b, forall c, exists d. '
                     'hb(a.S, b.S) /\\ hb(c.S, d.S)')
    with pytest.raises(UnsupportedAxiom):
        quantifier_blocks(s.axioms[0])


def test_concretize_requires_injective(a_sharp, pair):
    ax1 = a_sharp.axiom("ax1")
    aut = build_automaton(ax1, enumerate_contexts(ax1)[0], a_sharp.stages.names)
    a, b = pair.instrs()
    ca = concretize(aut, {"i1": a, "i2": b})
    assert ca.events[0] == Event(a, "S")
    assert ca.symbol_of(Event(b, "T")) == 3
    with pytest.raises(Exception):
        concretize(aut, {"i1": a, "i2": a})


BANK_CASES = [("rv", "rv_mp"), ("rv", "rv4"), ("fig3_core", "fig5"), ("a_sharp", "single_core3"),
              ("store_table", "domain4"), ("example2", "example2a")]


@pytest.mark.parametrize("axname,progname", BANK_CASES)
@settings(max_examples=40)
@given(data=st.data())
def test_bank_agrees_with_ground_evaluation(axname, progname, data):
    s = corpus.axioms(axname)
    prog = corpus.program(progname)
    if progname == "domain4":
        from uspecop.core import Program
        prog = Program(2, (("st", "ld"), ("st",)), prog.domain, prog.tables)
    b = bind(s, prog)
    evs = list(events_of(prog, b.stages))
    trace = data.draw(st.permutations(evs))
    bank = MonitorBank(b, prog)
    state, _ = bank.run(trace)
    accepted = state is not None and bank.accepts_final(state)
    assert accepted == ground_eval(b, prog, trace)[0] == is_valid_trace(trace, prog, b).valid
