import random

import pytest
from hypothesis import given, settings, strategies as st_

from kadt.canonical import Atom, canonical_for
from kadt.closure import fl_close, gamma_for
from kadt.decide import canonical_for_pair, decide
from kadt.generate import random_expr
from kadt.guarded import (
    Equal, GuardedString, NotKatOverGamma, Witness, all_atoms, canonical_interpret, fuse,
    fusion, hat, language_equal, member, normalize_to_kat, standard_interpret,
)
from kadt.syntax import (
    ONE, ZERO, Act, Anti, Dom, Prop, Sum, parse, question,
)

a, b = Act("a", 0), Act("b", 1)
p = Prop("p", 0)
seeds = st_.integers(0, 10**9)


def _gs(gamma, *letters):
    return GuardedString.of(gamma, letters)


def test_fusion():
    gamma = gamma_for([p])
    g, h = 0, (1 << len(gamma)) - 1
    assert fusion(_gs(gamma, g), _gs(gamma, g)) == _gs(gamma, g)
    assert fusion(_gs(gamma, g, "a", h), _gs(gamma, h, "b", g)) == _gs(gamma, g, "a", h, "b", g)
    assert fusion(_gs(gamma, g, "a", h), _gs(gamma, g, "b", h)) is None


def test_guarded_string_shape():
    gamma = fl_close([])
    with pytest.raises(ValueError):
        GuardedString((Atom(gamma, 0), "a"))
    with pytest.raises(ValueError):
        GuardedString(("a",))


def test_witness_print_format():
    C = canonical_for([parse("props p; p;a")])
    w = GuardedString((C.atoms[0], "a", C.atoms[1]))
    text = str(w)
    assert text.startswith("{") and " a {" in text and "!p" in text.split(" a ")[0]


def test_one_and_zero():
    C = canonical_for_pair(parse("props p; <a>p"), ONE)
    one = canonical_interpret(ONE, C)
    assert one.words(2) == {GuardedString((g,)) for g in C.atoms}
    assert canonical_interpret(ZERO, C).is_empty()


def test_antidomain_annihilates_language():
    e = parse("adom(a);a")
    C = canonical_for([e])
    assert canonical_interpret(e, C).is_empty()


def test_standard_action_is_all_triples():
    gamma = fl_close([])
    A = standard_interpret(a, gamma)
    atoms = all_atoms(gamma)
    assert A.words(2) == {_gs(gamma, g, "a", h) for g in atoms for h in atoms}


def test_standard_parameter():
    gamma = gamma_for([p])
    A = standard_interpret(p, gamma)
    k = gamma.index(p)
    assert A.words(1) == {_gs(gamma, m) for m in all_atoms(gamma) if m >> k & 1}


def test_standard_rejects_non_kat():
    with pytest.raises(NotKatOverGamma):
        standard_interpret(Dom(a), fl_close([]))


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_singleton_law(seed):
    rng = random.Random(seed)
    gamma = gamma_for([p])
    atoms = all_atoms(gamma)
    letters = [rng.choice(atoms)]
    for _ in range(rng.randint(0, 2)):
        letters += [rng.choice("ab"), rng.choice(atoms)]
    w = _gs(gamma, *letters)
    A = standard_interpret(w.as_expr(), gamma)
    assert A.words(len(w) + 1) == {w}


def test_hat_examples():
    C = canonical_for([parse("props p; <a>p")])
    assert hat(ZERO, C) == ZERO
    assert canonical_interpret(hat(ONE, C), C).words(1) == canonical_interpret(ONE, C).words(1)
    ha = hat(a, C)
    assert language_equal(standard_interpret(ha, C.gamma, C.masks), canonical_interpret(a, C)) == Equal()


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_hat_coherence(seed):
    rng = random.Random(seed)
    e = random_expr(rng, rng.randint(1, 6), ("a", "b"), ("p",))
    C = canonical_for([e])
    k = normalize_to_kat(e, C.gamma)
    left = canonical_interpret(k, C)
    right = standard_interpret(hat(k, C), C.gamma, C.masks)
    assert language_equal(left, right) == Equal()


def test_normalize_examples():
    e = Dom(a)
    gamma = gamma_for([e])
    assert normalize_to_kat(e, gamma) == question(e)
    assert normalize_to_kat(p, gamma_for([p])) == p
    e = Anti(a)
    gamma = gamma_for([e])
    n = normalize_to_kat(e, gamma)
    assert isinstance(n, Anti) and n.body in gamma
    assert decide(n, e).equivalent


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_normalize_preserves_meaning(seed):
    rng = random.Random(seed)
    e = random_expr(rng, rng.randint(1, 7))
    gamma = gamma_for([e])
    n = normalize_to_kat(e, gamma)
    standard_interpret(n, gamma, [0])  # only checks that n is over signed parameters
    assert decide(n, e).equivalent


def test_language_equal_examples():
    C = canonical_for_pair(a, Sum(a, a))
    A = canonical_interpret(a, C)
    assert language_equal(A, A) == Equal()
    assert language_equal(A, canonical_interpret(Sum(a, a), C)) == Equal()
    C = canonical_for_pair(a, b)
    res = language_equal(canonical_interpret(a, C), canonical_interpret(b, C))
    assert isinstance(res, Witness)
    assert len(res.word) == 2 and res.word.actions == ("a",)
    assert member(res.word, a, C) and not member(res.word, b, C)


def test_witness_is_shortest():
    e, f = parse("a;a"), parse("a;a;a")
    C = canonical_for_pair(e, f)
    res = language_equal(canonical_interpret(e, C), canonical_interpret(f, C))
    assert len(res.word) == 3


def test_member_examples():
    C = canonical_for_pair(parse("props p; p;a"), b)
    for g in C.atoms:
        assert member(GuardedString((g,)), ONE, C)
    for i, j in C.step_pairs("a"):
        w = GuardedString((C.atom(i), "a", C.atom(j)))
        assert member(w, a, C) and not member(w, b, C)
    gamma = C.gamma
    outside = [m for m in range(1 << len(gamma)) if C.position(m) is None][0]
    assert not member(_gs(gamma, outside), ONE, C)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_member_agrees_with_automaton(seed):
    rng = random.Random(seed)
    e = random_expr(rng, rng.randint(1, 6))
    C = canonical_for([e])
    A = canonical_interpret(e, C)
    words = A.words(3)
    for w in list(words)[:20]:
        assert member(w, e, C)
    # some strings outside the language
    for _ in range(10):
        letters = [rng.choice(C.masks)]
        for _ in range(rng.randint(0, 2)):
            letters += [rng.choice("ab"), rng.choice(C.masks)]
        w = _gs(C.gamma, *letters)
        assert member(w, e, C) == A.accepts(w)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_domain_extraction(seed):
    rng = random.Random(seed)
    e = random_expr(rng, rng.randint(1, 6))
    C = canonical_for([e])
    A = canonical_interpret(e, C)
    D = canonical_interpret(Dom(e), C)
    N = canonical_interpret(Anti(e), C)
    firsts = {w.first.bits for w in A.words(4)}
    assert {w.first.bits for w in D.words(1)} == A.first_atoms()
    assert firsts <= A.first_atoms()
    assert A.first_atoms() | N.first_atoms() == set(C.masks)
    assert not (A.first_atoms() & N.first_atoms())


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_fusion_product_of_automata(seed):
    rng = random.Random(seed)
    e, f = random_expr(rng, rng.randint(1, 4)), random_expr(rng, rng.randint(1, 4))
    C = canonical_for([e, f])
    A, B = canonical_interpret(e, C), canonical_interpret(f, C)
    expected = set()
    for x in A.words(3):
        for y in B.words(3):
            z = fusion(x, y)
            if z is not None and len(z) <= 3:
                expected.add(z)
    assert fuse(A, B).words(3) == expected
