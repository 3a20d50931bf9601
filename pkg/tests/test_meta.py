import functools

import pytest
from hypothesis import given, strategies as st

from uspecop import corpus
from uspecop.errors import CapExceeded, UnsupportedAxiom
from uspecop.lang import bind
from uspecop.meta import (check_axiom_extensibility, check_extensibility, check_refinability,
                          enumerate_posets, is_uspecRE, prefix_closed_subsets, witness_program)
from uspecop.automata import enumerate_contexts
from uspecop.uhb import is_valid, is_valid_trace, linearizations

from conftest import RE_SETS


def _brute_posets(n):
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    out = 0
    for bits in range(1 << len(pairs)):
        rel = {p for k, p in enumerate(pairs) if bits >> k & 1}
        if any((b, a) in rel for a, b in rel):
            continue
        if all((a, c) in rel for a, b in rel for b2, c in rel if b == b2 and a != c):
            out += 1
    return out


@pytest.mark.parametrize("n,count", [(0, 1), (1, 1), (2, 3), (3, 19), (4, 219)])
def test_poset_counts(n, count):
    got = list(enumerate_posets(n))
    assert len(got) == len(set(got)) == count
    if n <= 3:
        assert _brute_posets(n) == count


def test_posets_are_strict_orders():
    for rel in enumerate_posets(4):
        assert all(a != b and (b, a) not in rel for a, b in rel)
        assert all((a, c) in rel for a, b in rel for b2, c in rel if b == b2)


def test_poset_cap(monkeypatch):
    monkeypatch.setenv("USPECOP_POSET_CAP", "3")
    with pytest.raises(CapExceeded):
        list(enumerate_posets(4))


def _replay_refinability_witness(s, w):
    b = bind(s, w.program)
    assert is_valid(w.graph, w.program, b).valid
    assert not is_valid_trace(w.linearization, w.program, b).valid
    assert w.linearization in set(linearizations(w.graph))


def test_example1_not_refinable(domain4):
    r = check_refinability(corpus.axioms("example1"), domain4)
    assert not r.refinable
    w = r.witness
    assert len(w.program.instrs()) == 2
    assert w.graph.edges == frozenset() or not w.graph.edges
    b = bind(corpus.axioms("example1"), w.program)
    lins = list(linearizations(w.graph))
    assert lins and all(not is_valid_trace(l, w.program, b).valid for l in lins)
    _replay_refinability_witness(corpus.axioms("example1"), w)


def test_a_sharp_not_refinable(domain4, a_sharp):
    r = check_refinability(a_sharp, domain4)
    assert not r.refinable
    assert len(r.witness.linearization) == 4
    _replay_refinability_witness(a_sharp, r.witness)


@pytest.mark.parametrize("name", RE_SETS)
def test_re_corpus(name, domain4):
    r = is_uspecRE(corpus.axioms(name), domain4)
    assert r.member
    assert r.extensibility.extensible and r.refinability.refinable


def test_fig3_axioms_each_extensible(domain4, fig3):
    b = bind(fig3, domain4)
    assert check_extensibility(fig3, domain4).per_axiom == tuple(
        (n, True) for n in ("ax0", "ax1", "ax2", "ax3"))
    for ax in b.axioms:
        assert check_axiom_extensibility(ax, b, domain4.domain) is None


def test_reversed_not_extensible_and_witness_replays(domain4):
    s = corpus.axioms("reversed")
    r = check_extensibility(s, domain4)
    assert not r.extensible
    w = r.witness
    assert w.subset and set(w.subset) < set(bind(s, domain4).axiom(w.axiom).variables)
    ax = bind(s, domain4).axiom(w.axiom)
    prog, trace = witness_program(w, ax, bind(s, domain4), domain4)
    assert not is_valid_trace(trace, prog, bind(s, prog)).valid
    # the subset's events come first in the word
    seen_rest = False
    for v, _ in w.word:
        if v not in w.subset:
            seen_rest = True
        else:
            assert not seen_rest


def test_non_re_verdicts(domain4):
    assert not is_uspecRE(corpus.axioms("example1"), domain4).member
    assert not is_uspecRE(corpus.axioms("reversed"), domain4).member
    rv = is_uspecRE(corpus.axioms("rv"), corpus.program("rv4"))
    assert not rv.member and rv.extensibility is None
    with pytest.raises(UnsupportedAxiom):
        check_refinability(corpus.axioms("rv"), corpus.program("rv4"))


def test_prefix_closed_subsets(fig3):
    ax3 = fig3.axiom("ax3")
    for c in enumerate_contexts(ax3):
        subs = prefix_closed_subsets(ax3, c)
        assert all(0 < len(s) < ax3.arity for s in subs)
    # with i1 <r i2 true only {i1} is prefix-closed
    c = next(c for c in enumerate_contexts(ax3)
             if any(v for a, v in zip(c.atoms, c.values) if type(a).__name__ == "RefOrder"
                    and (a.v1, a.v2) == ("i1", "i2")))
    assert ("i2",) not in prefix_closed_subsets(ax3, c)


def test_refinability_cap(domain4):
    with pytest.raises(CapExceeded):
        check_refinability(corpus.axioms("fig3"), domain4, cap=3)


SHAPES = ((("st", "ld"),), (("ld", "st"),), (("st",), ("ld",)), (("add",), ("ld2",)))


@functools.lru_cache(maxsize=None)
def _graphs(name, shape):
    from uspecop.core import Program
    from uspecop.oracle import enumerate_valid_graphs
    dom = corpus.program("domain4")
    prog = Program(len(shape), shape, dom.domain, dom.tables)
    s = corpus.axioms(name)
    if len(prog.instrs()) * len(s.stages.names) > 4:
        return prog, ()
    return prog, tuple(enumerate_valid_graphs(s, prog))


@given(st.sampled_from(RE_SETS), st.sampled_from(SHAPES), st.data())
def test_refinable_sets_accept_every_linearization(name, shape, data):
    """For a refinable set every linearization of a valid graph is valid."""
    prog, graphs = _graphs(name, shape)
    if not graphs:
        return
    b = bind(corpus.axioms(name), prog)
    g = data.draw(st.sampled_from(graphs))
    for lin in linearizations(g):
        assert is_valid_trace(lin, prog, b).valid
