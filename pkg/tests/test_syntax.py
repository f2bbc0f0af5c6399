import pytest
from hypothesis import given, settings, strategies as st_

from kadt.generate import random_expr
from kadt.syntax import (
    FRAGMENT_EDGES, FRAGMENTS, ONE, ZERO, Act, Anti, Dom, ExprSyntaxError, NotAFormula,
    Prod, Prop, Star, Sum, box, classify, diamond, embed_aka, in_fragment, is_formula,
    is_parameter, is_test, is_testable, neg, parse, parse_many, question, st, subformulas,
    to_text,
)

a, b = Act("a", 0), Act("b", 1)
p, q = Prop("p", 0), Prop("q", 1)

exprs = st_.builds(
    lambda seed, size: random_expr(__import__("random").Random(seed), size, ("a", "b"), ("p", "q")),
    st_.integers(0, 10**9), st_.integers(1, 12))


def test_parse_antidomain_product():
    assert parse("adom(a);a") == Prod(Anti(a), a)


def test_parse_declared_proposition():
    assert parse("dom(p)", props=["p"]) == Dom(p)


def test_parse_conditional():
    e = parse("(p;a + adom(p);b)", props=["p"])
    assert e == Sum(Prod(p, a), Prod(Anti(p), b))


def test_parse_prelude_and_sugar():
    assert parse("props p; <a>p") == diamond(a, p)
    assert parse("props p; [a]p") == box(a, p)
    assert parse("props p; !p") == neg(p)
    assert parse("props p; p?") == Dom(p)


def test_parse_star_and_precedence():
    assert parse("a;b* + 1") == Sum(Prod(a, Star(b)), ONE)
    assert parse("0") == ZERO


def test_parse_errors():
    with pytest.raises(ExprSyntaxError):
        parse("a;(")
    with pytest.raises(ExprSyntaxError):
        parse("a +")


def test_undeclared_name_is_an_action():
    assert parse("p") == Act("p")


def test_shared_signature_indices():
    e, f = parse_many(["b;a", "a"])
    assert e.left.index == 0 and e.right.index == 1 and f.index == 1


@settings(max_examples=300)
@given(exprs)
def test_print_parse_round_trip(e):
    assert parse(to_text(e), props=["p", "q"]) == e


def test_subformulas():
    assert subformulas(a) == set()
    assert subformulas(Prod(Dom(a), a)) == {Dom(a)}
    assert subformulas(Anti(Prod(a, p))) == {Anti(Prod(a, p)), p}


def test_question():
    assert question(a) == Dom(a)
    assert question(Dom(a)) == Dom(Anti(Anti(a)))
    assert question(p) == Dom(p)


def test_st():
    assert st([a]) == set()
    assert st([Prod(Dom(a), a)]) == {Dom(Anti(Anti(a)))}
    assert st([p]) == {Dom(p)}


@settings(max_examples=200)
@given(exprs)
def test_question_is_a_test(e):
    assert is_test(question(e))
    assert is_parameter(question(e))


def test_predicates():
    assert is_formula(Anti(a)) and is_formula(Dom(a)) and is_formula(p)
    assert not is_formula(a) and not is_formula(Star(p))
    assert is_testable(Anti(a)) and not is_testable(Dom(a))
    assert is_test(Dom(a)) and not is_test(Dom(Dom(a)))


def test_sugar():
    assert diamond(a, p) == Anti(Anti(Prod(a, p)))
    assert box(a, p) == Anti(Prod(a, Anti(p)))
    with pytest.raises(NotAFormula):
        box(a, b)


def test_classify():
    assert classify(a) == set(FRAGMENTS)
    assert classify(Dom(a)) == {"dKA", "aKA", "dKAT", "aKAT"}
    assert classify(Anti(p)) == {"KAT", "KAT_Phi", "dKAT", "aKAT"}


@settings(max_examples=200)
@given(exprs)
def test_fragment_monotone(e):
    for low, high in FRAGMENT_EDGES:
        if in_fragment(e, low):
            assert in_fragment(e, high), (low, high)


def test_embed_examples():
    assert embed_aka(Act("a", 1)).index == 2
    out = embed_aka(Prop("p", 0))
    assert isinstance(out, Dom) and out.body.index == 1
    assert embed_aka(ZERO) == ZERO


@settings(max_examples=200)
@given(exprs)
def test_embed_lands_in_aka(e):
    assert "aKA" in classify(embed_aka(e))
