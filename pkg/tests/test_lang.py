import pytest
from hypothesis import given, strategies as st

from uspecop import corpus
from uspecop.core import Program
from uspecop.errors import ConfigError, UspecSyntaxError
from uspecop.lang import (FORALL, EXISTS, And, Hb, Implies, Not, Or, PredAtom, RefOrder,
                          bind, parse_axioms, parse_event, parse_formula, parse_program,
                          parse_trace, parse_traces, print_axiom_set, print_formula,
                          print_prefix, print_program, print_trace)

AXIOM_FILES = corpus.names(".uspec")
PROGRAM_FILES = corpus.names(".uprog")


@pytest.mark.parametrize("name", AXIOM_FILES)
def test_axiom_files_round_trip(name):
    s = corpus.axioms(name)
    assert parse_axioms(print_axiom_set(s)) == s


@pytest.mark.parametrize("name", PROGRAM_FILES)
def test_program_files_round_trip(name):
    p = corpus.program(name)
    assert parse_program(print_program(p)) == p


def test_fig3_structure(fig3):
    assert fig3.stages.names == ("Fet", "Dec", "Exe", "Com")
    assert [a.name for a in fig3.axioms] == ["ax0", "ax1", "ax2", "ax3"]
    ax1 = fig3.axiom("ax1")
    assert ax1.arity == 2 and ax1.universal
    assert isinstance(ax1.matrix, Implies)
    assert ax1.context_atoms() == (RefOrder("i1", "i2"), PredAtom("DepOn", ("i1", "i2")))


def test_operator_aliases_parse_alike():
    ascii_ = parse_formula("forall a, b. a <r b /\\ ~hb(a.S, b.S) => hb(b.S, a.S) \\/ a <r b")
    uni = parse_formula("∀ a, b. a <r b ∧ ¬hb(a.S, b.S) ⇒ hb(b.S, a.S) ∨ a <r b")
    cstyle = parse_formula("forall a, b. a <r b && !hb(a.S, b.S) => hb(b.S, a.S) || a <r b")
    assert ascii_ == uni == cstyle


def test_precedence_and_associativity():
    _, f = parse_formula("forall a, b. a <r b /\\ b <r a \\/ a <r b => b <r a => a <r b")
    ab, ba = RefOrder("a", "b"), RefOrder("b", "a")
    assert f == Implies(Or(And(ab, ba), ab), Implies(ba, ab))


def test_prefix_inheritance():
    q, _ = parse_formula("forall a, b, exists c, d. hb(a.S, c.S)")
    assert q == ((FORALL, "a"), (FORALL, "b"), (EXISTS, "c"), (EXISTS, "d"))
    assert print_prefix(q) == "forall a, b, exists c, d."


@pytest.mark.parametrize("text,line,col", [
    ("stages: S\naxiom \"a\": forall i. hb(i.S i.S)", 2, 29),
    ("stages: S\naxiom \"a\": forall i. hb(i.S, i.S) /\\", 2, 37),
    ("stages: S\naxiom \"a\" forall i. hb(i.S, i.S)", 2, 11),
    ("stages: S\n@", 2, 1),
])
def test_syntax_errors_carry_positions(text, line, col):
    with pytest.raises(UspecSyntaxError) as ei:
        parse_axioms(text)
    assert (ei.value.line, ei.value.column) == (line, col)


@pytest.mark.parametrize("text", [
    "stages: S\naxiom \"a\": forall i. hb(i.S, j.S)",  # unbound variable
    "stages: S\naxiom \"a\": forall i. hb(i.X, i.S)",  # unknown stage
    "stages: S\naxiom \"a\": forall i. P(i)",  # unknown predicate
    "stages: S\npred P(a) := k(a) == 1\naxiom \"a\": forall i, j. P(i, j)",  # arity
    "stages: S, S\naxiom \"a\": forall i. hb(i.S, i.S)",  # duplicate stage
    "stages: S\naxiom \"a\": forall i, i. hb(i.S, i.S)",  # repeated variable
    "stages: S\naxiom \"a\": forall i. hb(i.S, i.S)\naxiom \"a\": forall i. hb(i.S, i.S)",
])
def test_semantic_errors(text):
    with pytest.raises(ConfigError):
        parse_axioms(text)


def test_bind_checks_tables_and_metadata(domain4):
    st = corpus.axioms("store_table")
    bound = bind(st, domain4)
    assert bound.predicate_map()["IsStore"].table == frozenset({("st",)})
    no_table = Program(1, (("ld",),), domain4.domain)
    with pytest.raises(ConfigError):
        bind(st, no_table)
    with pytest.raises(ConfigError):
        bind(corpus.axioms("example2"), domain4)  # no 'tag' metadata
    staged = Program(1, (("ld",),), domain4.domain, stages=("A", "B"))
    with pytest.raises(ConfigError):
        bind(corpus.axioms("fig3"), staged)


def test_trace_parsing(fig5):
    tr = parse_trace("c0:0.Fet c0:0.Dec\n c1:1.Com  # comment", fig5)
    assert print_trace(tr) == "c0:0.Fet c0:0.Dec c1:1.Com"
    assert tr[2].instr.op == "add_r3"
    assert len(parse_traces("c0:0.Fet\n\nc0:1.Fet c1:0.Fet\n", fig5)) == 2
    with pytest.raises(UspecSyntaxError):
        parse_trace("c0:0.Fet c0:0.Fet", fig5)
    with pytest.raises(UspecSyntaxError):
        parse_event("c5:0.Fet", fig5)
    with pytest.raises(UspecSyntaxError):
        parse_event("c0:9.Fet", fig5)
    with pytest.raises(UspecSyntaxError):
        parse_event("bogus", fig5)


def test_program_parse_errors():
    with pytest.raises(UspecSyntaxError):
        parse_program("cores: 1\nop a {}\ncore 0 a")
    with pytest.raises(ConfigError):
        parse_program("cores: 1\nop a {}\ncore 0: b")


# -- properties ---------------------------------------------------------------

VARS = ["a", "b", "c"]
STAGES = ["S", "T"]

atom = st.one_of(
    st.builds(Hb, st.sampled_from(VARS), st.sampled_from(STAGES),
              st.sampled_from(VARS), st.sampled_from(STAGES)),
    st.builds(RefOrder, st.sampled_from(VARS), st.sampled_from(VARS)),
    st.builds(lambda a, b: PredAtom("P", (a, b)), st.sampled_from(VARS), st.sampled_from(VARS)),
)
formula = st.recursive(atom, lambda sub: st.one_of(
    st.builds(Not, sub), st.builds(And, sub, sub), st.builds(Or, sub, sub),
    st.builds(Implies, sub, sub)), max_leaves=8)


@given(formula, st.lists(st.sampled_from([FORALL, EXISTS]), min_size=3, max_size=3))
def test_formula_print_parse_round_trip(f, kinds):
    quants = tuple(zip(kinds, VARS))
    text = print_prefix(quants) + " " + print_formula(f)
    assert parse_formula(text) == (quants, f)
    src = "stages: S, T\npred P(x, y) := k(x) == k(y)\naxiom \"z\": " + text
    s = parse_axioms(src)
    assert parse_axioms(print_axiom_set(s)) == s


@given(st.text(alphabet="stagesxiomforallhb().,:\"/\\~=<r SiT12#\n", max_size=80))
def test_parser_fails_only_with_config_errors(text):
    try:
        parse_axioms(text)
    except ConfigError:
        pass
