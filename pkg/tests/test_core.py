import pytest

from uspecop.core import (Arith, Cmp, CoreRef, Event, Instruction, LabelRef, Lit, MetaRef,
                          OperationDomain, PAnd, PNot, PredicateDef, Program, StageSet,
                          eval_predicate, event_cap, events_of, poset_cap, prefix_split,
                          ref_order)
from uspecop.errors import ConfigError

DOM = OperationDomain.from_dict({"ld": {"kind": "load", "pc": 0},
                                 "st": {"kind": "store", "pc": 4}})


def test_stage_set_rejects_duplicates_and_empty():
    with pytest.raises(ConfigError):
        StageSet(("S", "S"))
    with pytest.raises(ConfigError):
        StageSet(())
    assert StageSet(("F", "E")).index("E") == 1
    with pytest.raises(ConfigError):
        StageSet(("F",)).index("X")


def test_domain_requires_uniform_keys():
    with pytest.raises(ConfigError):
        OperationDomain.from_dict({"a": {"k": 1}, "b": {"j": 1}})
    with pytest.raises(ConfigError):
        OperationDomain((("a", ()), ("a", ())))
    assert DOM.value("st", "pc") == 4
    with pytest.raises(ConfigError):
        DOM.value("st", "nope")
    with pytest.raises(ConfigError):
        DOM.metadata("nope")


def test_program_instructions_and_events():
    p = Program(2, (("ld", "st"), ("st",)), DOM)
    instrs = p.instrs()
    assert [str(i) for i in instrs] == ["c0:0", "c0:1", "c1:0"]
    evs = events_of(p, ("F", "E"))
    assert len(evs) == 6
    assert evs[0].token == "c0:0.F"
    assert p.size() == 3


def test_program_validation():
    with pytest.raises(ConfigError):
        Program(0, (), DOM)
    with pytest.raises(ConfigError):
        Program(2, (("ld",),), DOM)
    with pytest.raises(ConfigError):
        Program(1, (("xx",),), DOM)
    with pytest.raises(ConfigError):
        Program(1, (("ld",),), DOM, (("T", frozenset({("zz",)})),))


def test_reference_order_is_same_core_and_smaller_label():
    a, b, c = Instruction(0, 0, "ld"), Instruction(0, 1, "ld"), Instruction(1, 0, "ld")
    assert ref_order(a, b)
    assert not ref_order(b, a)
    assert not ref_order(a, c)
    assert not ref_order(a, a)


def test_prefix_split_keeps_labels_disjoint():
    p = Program(2, (("ld", "st", "ld"), ("st", "st")), DOM)
    pre, res = prefix_split(p, (1, 2))
    assert [str(i) for i in pre.instrs()] == ["c0:0", "c1:0", "c1:1"]
    assert [str(i) for i in res.instrs()] == ["c0:1", "c0:2"]
    assert set(pre.instrs()).isdisjoint(res.instrs())
    assert set(pre.instrs()) | set(res.instrs()) == set(p.instrs())
    with pytest.raises(ConfigError):
        prefix_split(p, (4, 0))
    with pytest.raises(ConfigError):
        prefix_split(p, (1,))


def test_predicate_evaluation_with_accessors_and_arithmetic():
    # next(a, b): b directly follows a on the same core and its pc is 4 more
    expr = PAnd(Cmp("==", CoreRef("a"), CoreRef("b")),
                PAnd(Cmp("==", Arith("+", LabelRef("a"), Lit(1)), LabelRef("b")),
                     Cmp("==", Arith("+", MetaRef("pc", "a"), Lit(4)), MetaRef("pc", "b"))))
    nxt = PredicateDef("Next", 2, ("a", "b"), expr)
    a, b = Instruction(0, 0, "ld"), Instruction(0, 1, "st")
    assert eval_predicate(nxt, (a, b), DOM)
    assert not eval_predicate(nxt, (b, a), DOM)
    assert nxt.reads_position
    is_load = PredicateDef("L", 1, ("a",), PNot(Cmp("!=", MetaRef("kind", "a"), Lit("load"))))
    assert eval_predicate(is_load, (a,), DOM)
    assert not eval_predicate(is_load, (b,), DOM)
    assert is_load.metadata_keys() == {"kind"}


def test_table_predicate():
    p = Program(1, (("ld", "st"),), DOM, (("IsSt", frozenset({("st",)})),))
    tp = p.table_predicates()["IsSt"]
    assert tp.arity == 1
    a, b = p.instrs()
    assert eval_predicate(tp, (b,), DOM)
    assert not eval_predicate(tp, (a,), DOM)


def test_caps_from_environment(monkeypatch):
    monkeypatch.delenv("USPECOP_EVENT_CAP", raising=False)
    assert event_cap(8) == 8
    monkeypatch.setenv("USPECOP_EVENT_CAP", "5")
    assert event_cap(8) == 5
    monkeypatch.setenv("USPECOP_POSET_CAP", "4")
    assert poset_cap() == 4


def test_event_token_and_order():
    e = Event(Instruction(1, 2, "ld"), "Exe")
    assert e.token == "c1:2.Exe"
    assert str(e) == e.token
    assert e.sort_key == (1, 2, "Exe")
