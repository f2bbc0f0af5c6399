import random

import pytest
from hypothesis import given, settings, strategies as st_

from kadt.canonical import (
    Atom, BudgetExceeded, ClosureDeficiency, NotClosed, build_canonical, canonical_for,
    coherent_atoms, entails, is_consistent, sat,
)
from kadt.closure import ParameterSet, fl_close, gamma_for
from kadt.generate import all_exprs, random_expr
from kadt.relational import all_models, relation_rows, satisfies, truth_set
from kadt.syntax import (
    ONE, ZERO, Act, Anti, Dom, Prop, Star, box, conj, diamond, neg, parse,
)

a = Act("a", 0)
p = Prop("p", 0)


def test_empty_closure_has_one_atom():
    C = build_canonical(fl_close([]))
    assert C.size == 1
    assert C.actions == () and C.succ == {}
    # the surviving atom is the only locally coherent one
    assert coherent_atoms(C.gamma) == list(C.masks)
    g = C.atoms[0]
    assert g.holds(Dom(ONE)) and not g.holds(Dom(ZERO))


def test_proposition_gives_two_atoms():
    C = build_canonical(gamma_for([p]))
    assert C.size == 2
    assert {g.holds(p) for g in C.atoms} == {True, False}


def test_domain_and_antidomain_clash_eliminated():
    gamma = fl_close([Dom(a), Dom(Anti(a))])
    C = build_canonical(gamma)
    assert all(not (g.holds(Dom(a)) and g.holds(Dom(Anti(a)))) for g in C.atoms)
    clash = [m for m in range(1 << len(gamma))
             if Atom(gamma, m).holds(Dom(a)) and Atom(gamma, m).holds(Dom(Anti(a)))]
    assert clash and not any(is_consistent(Atom(gamma, m), C) for m in clash)


def test_zero_positive_atom_inconsistent():
    gamma = fl_close([])
    C = build_canonical(gamma)
    bad = Atom(gamma, C.masks[0] | 1 << gamma.index(Dom(ZERO)))
    assert not is_consistent(bad, C)
    assert is_consistent(C.atoms[0], C)


def test_atom_gamma_mismatch():
    C = build_canonical(fl_close([]))
    other = Atom(gamma_for([p]), 0)
    with pytest.raises(ValueError):
        is_consistent(other, C)


def test_entails():
    C = build_canonical(gamma_for([p]))
    for g in C.atoms:
        assert entails(g, p) == g.holds(p)
        assert entails(g, Anti(Anti(p))) == g.holds(p)
        assert entails(g, ONE) and not entails(g, ZERO)
        assert g.holds(Anti(p)) != g.holds(p)


def test_entails_outside_gamma():
    C = build_canonical(fl_close([]))
    with pytest.raises(ClosureDeficiency):
        entails(C.atoms[0], p)


def test_unclosed_input_rejected():
    with pytest.raises(NotClosed):
        build_canonical(ParameterSet([Dom(a)]))


def test_budget():
    with pytest.raises(BudgetExceeded):
        canonical_for([parse("props p; <a*>p + [a]p")], max_atoms=3)


def test_sat_examples():
    assert sat(ONE)[0]
    assert not sat(conj(diamond(a, p), box(a, neg(p))))[0]
    ok, M, x = sat(diamond(Star(a), p))
    assert ok and satisfies(M, x, diamond(Star(a), p))


def test_star_diamond_two_state_model():
    from kadt.relational import RelationalModel
    M = RelationalModel.build(2, {"a": [(0, 1)]}, {"p": [1]})
    assert satisfies(M, 0, diamond(Star(a), p))


def test_unsat_confirmed_by_small_models():
    phi = conj(diamond(a, p), box(a, neg(p)))
    assert all(truth_set(phi, M) == 0 for M in all_models(2, ["a"], ["p"]))


seeds = st_.integers(0, 10**9)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_signs_agree_with_relational_truth(seed):
    rng = random.Random(seed)
    exprs = [random_expr(rng, rng.randint(1, 8)) for _ in range(2)]
    C = canonical_for(exprs)
    M = C.to_relational()
    cols = C.columns()
    for k, param in enumerate(C.gamma):
        assert truth_set(param, M) == cols[k]


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_sat_model_is_checked(seed):
    from kadt.generate import random_formula
    rng = random.Random(seed)
    phi = random_formula(rng, rng.randint(1, 8))
    ok, M, x = sat(phi)
    if ok:
        assert satisfies(M, x, phi)


def _realized(gamma, models):
    out = set()
    for M in models:
        memo = {}
        rows = [relation_rows(param, M, memo) for param in gamma]
        for x in M.states:
            out.add(sum(1 << k for k, r in enumerate(rows) if r[x] >> x & 1))
    return out


def test_atoms_agree_with_three_state_models():
    models = list(all_models(3, ["a"], ["p"]))
    rng = random.Random(11)
    corpus = all_exprs(3)
    picks = rng.sample(corpus, 12) + [parse("props p; <a*>p"), parse("props p; [a](p;<a>p)")]
    for e in picks:
        C = canonical_for([e])
        assert set(C.masks) == _realized(C.gamma, models), e
