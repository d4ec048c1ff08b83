import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import core_formulas, formulas, naive_reach
from pastltl.errors import EmptyPremises, FormulaSyntaxError, UnknownOperator
from pastltl.syntax import (BOTTOM, TOP, And, Atom, Box, Diamond, Implies, K1, K2, KPar, Next,
                            Not, Or, Rule, Since, apply_substitution, atoms, compose,
                            expand_derived, is_core, parse_formula, parse_rule, render,
                            temporal_reach)

p, q, x, y = Atom("p"), Atom("q"), Atom("x"), Atom("y")
x1, x2 = Atom("x1"), Atom("x2")


@pytest.mark.parametrize("text, expected", [
    ("p", p),
    ("q S p", Since(q, p)),
    ("N x1 -> N x2", Implies(Next(x1), Next(x2))),
    ("true", TOP),
    ("false", BOTTOM),
    ("~p & q", And(Not(p), q)),
    ("p | q & x", Or(p, And(q, x))),
    ("p -> q -> x", Implies(p, Implies(q, x))),
    ("p S q S x", Since(Since(p, q), x)),
    ("N p S q", Since(Next(p), q)),
    ("p & q S x", And(p, Since(q, x))),
    ("[]p", Box(p)),
    ("<>p", Diamond(p)),
    ("K1 p", K1(p)),
    ("K2 ~p", K2(Not(p))),
    ("K[q] p", KPar(q, p)),
    ("K[q & p] N x", KPar(And(q, p), Next(x))),
    ("  ( p )  ", p),
    ("x_1a9", Atom("x_1a9")),
])
def test_parse_formula(text, expected):
    assert parse_formula(text) == expected


@pytest.mark.parametrize("text, expected", [
    ("N x / x", Rule((Next(x),), x)),
    ("x / x", Rule((x,), x)),
    ("x -> x / ~p", Rule((Implies(x, x),), Not(p))),
    ("p, q / x", Rule((p, q), x)),
])
def test_parse_rule(text, expected):
    assert parse_rule(text) == expected


def test_rule_variables_are_union_of_atoms():
    assert parse_rule("p, N q / x S p").variables == {"p", "q", "x"}


@pytest.mark.parametrize("obj, text", [
    (p, "p"),
    (Since(q, p), "q S p"),
    (Rule((Next(x),), x), "N x / x"),
    (Implies(Implies(p, q), x), "(p -> q) -> x"),
    (Since(p, Since(q, x)), "p S (q S x)"),
    (Not(And(p, q)), "~(p & q)"),
    (KPar(q, p), "K[q] p"),
])
def test_render(obj, text):
    assert render(obj) == text


@pytest.mark.parametrize("text, line, column", [
    ("p &", 1, 4),
    ("p q", 1, 3),
    ("(p", 1, 3),
    ("p &\n& q", 2, 1),
])
def test_syntax_error_position(text, line, column):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    assert (info.value.line, info.value.column) == (line, column)
    assert info.value.expected


def test_lexical_error_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("p $ q")
    assert (info.value.line, info.value.column) == (1, 3)


def test_syntax_error_is_builtin_syntax_error():
    with pytest.raises(SyntaxError):
        parse_formula(")")


@pytest.mark.parametrize("text", ["p U q", "G p", "X p"])
def test_unknown_operator(text):
    with pytest.raises(UnknownOperator):
        parse_formula(text)


@pytest.mark.parametrize("text", ["/ x", " / x"])
def test_empty_premises(text):
    with pytest.raises(EmptyPremises):
        parse_rule(text)


@pytest.mark.parametrize("text", ["x / ", "x, / y", "x / y / z", "x"])
def test_malformed_rules(text):
    with pytest.raises(FormulaSyntaxError):
        parse_rule(text)


@pytest.mark.parametrize("f, expected", [
    (K1(p), Since(p, p)),
    (K2(p), Not(Since(TOP, Not(p)))),
    (KPar(q, p), Since(p, q)),
    (Box(p), Not(Since(TOP, Not(p)))),
    (Diamond(p), Since(TOP, p)),
    (Not(K1(Box(x))), Not(Since(Not(Since(TOP, Not(x))), Not(Since(TOP, Not(x)))))),
])
def test_expand_derived(f, expected):
    assert expand_derived(f) == expected


@pytest.mark.parametrize("f, s, expected", [
    (Or(x, Not(x)), {"x": p}, Or(p, Not(p))),
    (Since(q, x), {}, Since(q, x)),
    (Since(x, x), {"x": Next(y)}, Since(Next(y), Next(y))),
    (And(x, y), {"x": y, "y": x}, And(y, x)),
])
def test_apply_substitution(f, s, expected):
    assert apply_substitution(f, s) == expected


@pytest.mark.parametrize("f, m, expected", [
    (p, 1, 0),
    (Since(q, p), 2, 2),
    (Not(Since(TOP, Not(Since(TOP, Not(x))))), 1, 2),
    (Next(Next(p)), 3, 2),
    (Since(Next(p), q), 2, 3),
])
def test_temporal_reach(f, m, expected):
    assert temporal_reach(f, m) == expected
    assert naive_reach(f, m) == expected


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_render_parse_round_trip(f):
    assert parse_formula(render(f)) == f


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_rule_round_trip(f):
    r = Rule((f, Not(f)), f)
    assert parse_rule(render(r)) == r


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_expansion_yields_core(f):
    g = expand_derived(f)
    assert is_core(g)
    assert atoms(g) == atoms(f)


@settings(max_examples=200, deadline=None)
@given(core_formulas)
def test_expansion_noop_on_core(f):
    assert expand_derived(f) == f


substitutions = st.dictionaries(st.sampled_from(["p", "q"]), core_formulas, max_size=2)


@settings(max_examples=200, deadline=None)
@given(core_formulas, substitutions, substitutions)
def test_substitution_composition(f, s1, s2):
    assert apply_substitution(apply_substitution(f, s1), s2) == \
        apply_substitution(f, compose(s1, s2))


@settings(max_examples=200, deadline=None)
@given(core_formulas, st.integers(1, 4))
def test_reach_matches_recursion_and_is_monotone(f, m):
    assert temporal_reach(f, m) == naive_reach(f, m)
    if any(isinstance(g, Since) for g in _nodes(f)):
        assert temporal_reach(f, m + 1) > temporal_reach(f, m)


def _nodes(f):
    yield f
    for attr in ("child", "left", "right"):
        if hasattr(f, attr):
            yield from _nodes(getattr(f, attr))
