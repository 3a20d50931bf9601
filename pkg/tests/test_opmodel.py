import pytest
from hypothesis import given, settings, strategies as st

from uspecop import corpus
from uspecop.core import Event, Program, events_of
from uspecop.errors import ConfigError, UnsupportedAxiom
from uspecop.lang import bind, parse_trace
from uspecop.opmodel import (Configuration, Drop, MachineError, OperationalModel, Right, Sched,
                             Stay, actions_for, analyze, check_generator, is_t_bounded,
                             min_bound, operational_loop, replay, state_footprint, step,
                             t_violation)
from uspecop.oracle import PipelineGenerator, enumerate_valid_traces
from uspecop.uhb import is_valid_trace


def _prog(shape, ops=None):
    dom = corpus.program("domain4")
    ops = ops or ["st", "ld", "add", "ld2"]
    it = iter(ops * 4)
    return Program(len(shape), tuple(tuple(next(it) for _ in range(k)) for k in shape),
                   dom.domain, dom.tables)


# -- machine ------------------------------------------------------------------


def test_step_semantics(pair):
    cfg = Configuration.initial(pair)
    a, b = pair.instrs()
    assert cfg.V == ((a, b),) and cfg.U == ((),)
    cfg, e = step(cfg, Right(0), ("S",), 1)
    assert e is None and cfg.U == ((a,),)
    with pytest.raises(MachineError, match="history overflow"):
        step(cfg, Right(0), ("S",), 1)
    with pytest.raises(MachineError, match="incomplete"):
        step(cfg, Drop(0, 1), ("S",), 1)
    with pytest.raises(MachineError, match="slot"):
        step(cfg, Sched(0, 2, "S"), ("S",), 1)
    assert step(cfg, Stay(), ("S",), 1) == (cfg, None)
    cfg, e = step(cfg, Sched(0, 1, "S"), ("S",), 1)
    assert e == Event(a, "S")
    with pytest.raises(MachineError, match="cannot schedule"):
        step(cfg, Sched(0, 1, "S"), ("S",), 1)
    cfg, _ = step(cfg, Drop(0, 1), ("S",), 1)
    cfg, _ = step(cfg, Right(0), ("S",), 1)
    cfg, _ = step(cfg, Sched(0, 1, "S"), ("S",), 1)
    cfg, _ = step(cfg, Drop(0, 1), ("S",), 1)
    assert cfg.final
    with pytest.raises(MachineError):
        step(cfg, Right(3), ("S",), 1)


def test_single_core3_bound():
    prog = corpus.program("single_core3")
    s = corpus.axioms("a_sharp")
    tr = parse_trace(corpus.text("single_core3.utrace"), prog, s.stages)
    a = analyze(tr, prog)
    i2 = prog.instrs()[2]
    assert a.pfxend[i2] == 6
    assert min_bound(tr, prog) == 3
    v = t_violation(tr, prog, 2)
    assert v is not None and v.describe()
    assert is_t_bounded(tr, prog, 3)


def test_state_footprint():
    fp = state_footprint(corpus.axioms("fig3"), 3, 2)
    assert fp["in_progress"] == 6 and fp["t_K"] == 10 and fp["K"] == 2
    assert state_footprint(corpus.axioms("fig3"), 1, 1)["in_progress"] == 1


def _all_traces(prog, stages):
    evs = list(events_of(prog, stages))
    return st.permutations(evs)


@settings(max_examples=80)
@given(st.sampled_from([(1,), (2,), (3,), (1, 1), (2, 1), (2, 2)]), st.data())
def test_window_is_in_progress_set(shape, data):
    prog = _prog(shape)
    stages = ("A", "B")
    tr = data.draw(_all_traces(prog, stages))
    a = analyze(tr, prog)
    snaps = replay(tr, prog, stages, h=len(tr))
    assert len(snaps) == len(tr)
    for j, cfg in enumerate(snaps, 1):
        assert {i for u in cfg.U for i in u} == a.IP(j)
        assert a.pCM(j) <= a.CM(j) and a.pNF(j) <= a.NF(j)
    assert snaps[-1].final


@settings(max_examples=60)
@given(st.sampled_from([(2,), (3,), (2, 1), (2, 2)]), st.data())
def test_t_bound_is_monotone(shape, data):
    prog = _prog(shape)
    tr = data.draw(_all_traces(prog, ("A", "B")))
    t = min_bound(tr, prog)
    assert all(is_t_bounded(tr, prog, u) for u in range(t, t + 3))
    assert all(not is_t_bounded(tr, prog, u) for u in range(1, t))


def test_actions_respect_history():
    prog = corpus.program("single_core3")
    s = corpus.axioms("a_sharp")
    tr = parse_trace(corpus.text("single_core3.utrace"), prog, s.stages)
    assert any(isinstance(a, Drop) for a in actions_for(tr, prog, s.stages.names))
    with pytest.raises(MachineError):
        replay(tr, prog, s.stages.names, h=1)
    replay(tr, prog, s.stages.names, h=3)


# -- exploration ----------------------------------------------------------------


def _cases():
    return [("a_sharp", "single_core3"), ("a_sharp", "pair"), ("fig3_core", "fig5"),
            ("pipeline", "pair"), ("core_total", "domain4_1x3"), ("dep_order", "domain4_2x1"),
            ("same_addr", "domain4_2x1")]


def _load(progname):
    if progname == "domain4_1x3":
        return _prog((3,))
    if progname == "domain4_2x1":
        return _prog((2, 1))
    return corpus.program(progname)


@pytest.mark.parametrize("axname,progname", _cases())
@pytest.mark.parametrize("t", [1, 2, 3])
def test_exploration_matches_oracle(axname, progname, t):
    s, prog = corpus.axioms(axname), _load(progname)
    valid = enumerate_valid_traces(s, prog)
    want = {tr for tr in valid if is_t_bounded(tr, prog, t)}
    bounded = operational_loop(s, prog, t, bounded=True).trace_set()
    assert bounded == want
    if axname != "a_sharp":  # finite mode is only complete for extensible sets
        assert operational_loop(s, prog, t).trace_set() == want


@pytest.mark.parametrize("axname,progname", _cases())
def test_trace_sets_grow_with_t(axname, progname):
    s, prog = corpus.axioms(axname), _load(progname)
    prev = set()
    for t in range(1, 5):
        cur = operational_loop(s, prog, t, bounded=True).trace_set()
        assert prev <= cur
        prev = cur


@pytest.mark.parametrize("axname,progname", _cases()[2:])
def test_memo_matches_plain_search(axname, progname):
    s, prog = corpus.axioms(axname), _load(progname)
    for bounded in (False, True):
        m = OperationalModel(s, prog, 2, bounded=bounded)
        assert set(m.explore(memoize=True).traces) == set(m.explore(memoize=False).traces)


def test_large_t_gives_every_valid_trace():
    s, prog = corpus.axioms("fig3_core"), corpus.program("fig5")
    n = len(events_of(prog, s.stages.names))
    assert operational_loop(s, prog, n).trace_set() == enumerate_valid_traces(s, prog)


def test_online_guard_matches_post_filter():
    s, prog = corpus.axioms("dep_order"), _prog((2, 2))
    big = operational_loop(s, prog, 8, bounded=True).trace_set()
    for t in (1, 2, 3):
        assert operational_loop(s, prog, t, bounded=True).trace_set() == {
            tr for tr in big if is_t_bounded(tr, prog, t)}


def test_emitted_traces_are_sound_and_permutations():
    s, prog = corpus.axioms("fig3_core"), corpus.program("fig5")
    b = bind(s, prog)
    evs = set(events_of(prog, s.stages.names))
    res = operational_loop(s, prog, 2)
    assert res.stats.traces == len(res.traces) > 0
    for tr in res.traces:
        assert set(tr) == evs and len(tr) == len(evs)
        assert is_valid_trace(tr, prog, b).valid


def test_empty_program():
    prog = Program(1, ((),), corpus.program("pair").domain, ())
    assert operational_loop(corpus.axioms("core_total"), prog, 1).traces == [()]


def test_configuration_errors(pair):
    with pytest.raises(ConfigError):
        operational_loop(corpus.axioms("a_sharp"), pair, 0)
    with pytest.raises(UnsupportedAxiom):
        operational_loop(corpus.axioms("rv"), corpus.program("rv4"), 2)
    with pytest.raises(ConfigError):
        operational_loop(corpus.axioms("a_sharp"), pair, 2, mode="sideways")


def test_random_mode_is_deterministic():
    s, prog = corpus.axioms("fig3_core"), corpus.program("fig5")
    r1 = operational_loop(s, prog, 2, mode="random", seed=7, count=20)
    r2 = operational_loop(s, prog, 2, mode="random", seed=7, count=20)
    assert r1.traces == r2.traces and r1.mode == "random"
    valid = enumerate_valid_traces(s, prog)
    assert set(r1.traces) <= valid


def test_run_trace_reports_reasons():
    s, prog = corpus.axioms("fig3"), corpus.program("fig5")
    ok = parse_trace(corpus.text("fig4a.utrace"), prog, s.stages)
    bad = parse_trace(corpus.text("fig4b.utrace"), prog, s.stages)
    m = OperationalModel(s, prog, 2)
    assert m.run_trace(ok)[0]
    accepted, idx, reason = m.run_trace(bad)
    assert not accepted and reason == "monitor" and idx is not None


def test_bounded_rv_counts():
    s, prog = corpus.axioms("rv"), corpus.program("rv4")
    r = operational_loop(s, prog, 2, bounded=True, counting="pairs")
    valid = enumerate_valid_traces(s, prog)
    assert r.trace_set() == {tr for tr in valid if is_t_bounded(tr, prog, 2)}


# -- generator product ------------------------------------------------------------


@pytest.mark.parametrize("shape", [(1,), (2,), (3,), (1, 1), (2, 2), (3, 3)])
def test_pipeline_generator_passes(shape):
    s = corpus.axioms("pipeline")
    prog = _prog(shape)
    res = check_generator(s, prog, PipelineGenerator(prog, s.stages.names))
    assert res.passed and res.witness is None


def test_faulty_generator_caught():
    s = corpus.axioms("pipeline")
    prog = _prog((2,))
    gen = PipelineGenerator(prog, s.stages.names, fault=prog.instrs()[1])
    res = check_generator(s, prog, gen)
    assert not res.passed and res.failed_axiom
    assert not is_valid_trace(res.witness, prog, bind(s, prog)).valid
    assert set(res.witness) == set(events_of(prog, s.stages.names))
