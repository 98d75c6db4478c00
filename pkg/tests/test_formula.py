from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hyperpctl.formula import (
    And, Atom, BoundedUntil, Compare, Const, Exists, Finally, Forall, FormulaError,
    Globally, Implies, InInterval, Neg, Next, Prob, Sub, TrueF, Until, check_sentence,
    children, desugar, is_core, parse_formula, parse_path, parse_prob_expr, prepare,
    subformulas_inside_out, to_text, walk,
)

from oracles import SentenceGen, make_rng

PSI = "forall s. forall t. (init@s & init@t) => (P(F a@s) = P(F a@t))"


def test_parse_psi():
    f = parse_formula(PSI)
    assert f == Forall("s", Forall("t", Implies(
        And(Atom("init", "s"), Atom("init", "t")),
        Compare(Prob(Finally(Atom("a", "s"))), "=", Prob(Finally(Atom("a", "t")))),
    )))


def test_parse_true():
    assert parse_formula("true") == TrueF()
    assert parse_formula("  (true) ") == TrueF()


def test_bound_violation():
    with pytest.raises(FormulaError, match="k1 <= k2") as exc:
        parse_formula("P(a@s U[3,1] b@s) = 1")
    assert exc.value.pos == 7  # the opening bracket


@pytest.mark.parametrize(
    "text, message",
    [
        ("P(F a@s) = 1e-3", "non-rational"),
        ("P(F a@s) = 1/0", "zero denominator"),
        ("P(F a@s) in [1/2, 1/4]", "interval"),
        ("forall s. a@s &", "expected"),
        ("forall s. G a@s", "only allowed directly under P"),
        ("forall s. a@", "state variable"),
        ("P(X a@s) = 1 garbage", "unexpected"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(FormulaError, match=message):
        parse_formula(text)


def test_error_reports_position():
    with pytest.raises(FormulaError) as exc:
        parse_formula("forall s. a@s & & b@s")
    assert exc.value.pos is not None
    assert "^" in str(exc.value)


def test_precedence():
    f = parse_formula("!a@s & b@s | c@s => d@s <=> e@s")
    # <=> loosest, then =>, |, &, !
    assert to_text(f) == "((((!a@s & b@s) | c@s) => d@s) <=> e@s)"


def test_implication_is_right_associative():
    f = parse_formula("a@s => b@s => c@s")
    assert f == Implies(Atom("a", "s"), Implies(Atom("b", "s"), Atom("c", "s")))


def test_quantifier_extends_right():
    f = parse_formula("forall s. a@s & b@s")
    assert isinstance(f, Forall) and isinstance(f.body, And)


def test_arithmetic_precedence():
    e = parse_prob_expr("1/2 + 1/4 * P(X a@s) - 1")
    assert to_text(e) == "((1/2 + (1/4 * P(X a@s))) - 1)"


def test_path_forms():
    assert parse_path("a@s U<=3 b@s") == BoundedUntil(Atom("a", "s"), Atom("b", "s"), 0, 3)
    assert parse_path("F[1,2] a@s") == Finally(Atom("a", "s"), (1, 2))
    assert parse_path("G a@s") == Globally(Atom("a", "s"))
    assert parse_path("X a@s") == Next(Atom("a", "s"))


def test_props_with_equals_and_dots():
    f = parse_formula("l=1@s & t.y@s")
    assert f == And(Atom("l=1", "s"), Atom("t.y", "s"))
    f = parse_formula("P(F l=1@s) != P(F l=1@t)")
    assert f.rel == "!="


def test_keyword_prefix_is_a_prop():
    f = parse_formula("Fa@s & Ux@s & Xb@s & P@s")
    assert [a.prop for a in walk(f) if isinstance(a, Atom)] == ["Fa", "Ux", "Xb", "P"]


# -- desugaring ---------------------------------------------------------------


def test_desugar_interval():
    f = desugar(parse_formula("P(F a@s) in [1/4, 3/4]"))
    p = Prob(Until(TrueF(), Atom("a", "s")))
    assert f == And(Compare(Const(Fraction(1, 4)), "<=", p), Compare(p, "<=", Const(Fraction(3, 4))))


def test_desugar_globally():
    f = desugar(parse_formula("P(G a@s) = 1"))
    assert f == Compare(Sub(Const(Fraction(1)), Prob(Until(TrueF(), Neg(Atom("a", "s"))))), "=", Const(Fraction(1)))


def test_desugar_bounded_globally():
    f = desugar(parse_formula("P(G[1,2] a@s) = 1"))
    assert f.left.right == Prob(BoundedUntil(TrueF(), Neg(Atom("a", "s")), 1, 2))


def test_desugar_or():
    a, b = Atom("a", "s"), Atom("b", "s")
    assert desugar(parse_formula("a@s | b@s")) == Neg(And(Neg(a), Neg(b)))


def test_globally_outside_prob_rejected():
    # G nested under another temporal operator has no path-level meaning
    with pytest.raises(FormulaError):
        parse_formula("P(F G a@s) = 1")
    with pytest.raises(FormulaError, match="G"):
        desugar(Compare(Prob(Finally(Globally(Atom("a", "s")))), "=", Const(Fraction(1))))


# -- sentences ----------------------------------------------------------------


def test_check_sentence_psi():
    info = prepare(PSI)
    assert info.n == 2 and info.kinds == ("forall", "forall") and info.names == ("s", "t")
    atoms = {(a.prop, a.index) for a in walk(info.formula) if isinstance(a, Atom)}
    assert atoms == {("init", 1), ("init", 2), ("a", 1), ("a", 2)}
    assert all(a.var is None for a in walk(info.formula) if isinstance(a, Atom))


def test_free_atom_is_rejected():
    with pytest.raises(FormulaError, match="'s' is unbound"):
        prepare("P(F a@s) = 1")


def test_shadowing_binds_innermost():
    info = prepare("forall s. exists s. a@s")
    assert info.n == 2
    assert info.formula == Forall(None, Exists(None, Atom("a", None, 2), 2), 1)


def test_zero_quantifiers():
    info = prepare("1/2 < 3/4")
    assert info.n == 0


def test_subformulas_inside_out_psi():
    info = prepare(PSI)
    order = subformulas_inside_out(info.formula)
    assert isinstance(order[-1], Forall) and order[-1].index == 1
    assert isinstance(order[-2], Forall) and order[-2].index == 2
    assert Atom("init", None, 1) in order and Atom("init", None, 2) in order
    conj = And(Atom("init", None, 1), Atom("init", None, 2))
    cmp_ = next(g for g in order if isinstance(g, Compare))
    assert order.index(conj) < order.index(order[-3])
    assert order.index(cmp_) < order.index(order[-3])


def test_subformulas_trivial():
    assert subformulas_inside_out(TrueF()) == [TrueF()]
    a = Atom("a", None, 1)
    assert subformulas_inside_out(Neg(a)) == [a, Neg(a)]


# -- properties ---------------------------------------------------------------

sentences = st.integers(0, 10**9).map(lambda seed: SentenceGen(make_rng(seed)).sentence())


@settings(max_examples=300, deadline=None)
@given(sentences)
def test_desugar_idempotent(text):
    once = desugar(parse_formula(text))
    assert is_core(once)
    assert desugar(once) == once


@settings(max_examples=300, deadline=None)
@given(sentences)
def test_print_parse_round_trip(text):
    core = desugar(parse_formula(text))
    assert parse_formula(to_text(core)) == core
    sugared = parse_formula(text)
    assert parse_formula(to_text(sugared)) == sugared


@settings(max_examples=300, deadline=None)
@given(sentences)
def test_renaming_indices(text):
    info = prepare(text)
    quantifiers = [g for g in walk(info.formula) if isinstance(g, (Forall, Exists))]
    assert sorted(q.index for q in quantifiers) == list(range(1, info.n + 1))
    assert len(info.kinds) == len(info.names) == info.n
    for a in walk(info.formula):
        if isinstance(a, Atom):
            assert a.var is None and 1 <= a.index <= info.n


@settings(max_examples=300, deadline=None)
@given(sentences)
def test_inside_out_children_first(text):
    order = subformulas_inside_out(prepare(text).formula)
    pos = {g: i for i, g in enumerate(order)}
    assert len(pos) == len(order)

    def state_descendants(g):
        for c in children(g):
            if c in pos:
                yield c
            else:
                yield from state_descendants(c)

    for g in order:
        for c in state_descendants(g):
            assert pos[c] < pos[g]
