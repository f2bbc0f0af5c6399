"""Acceptance criteria. Each test prints one PASS/FAIL line."""

import itertools
import random
import time

import pytest

from kadt.canonical import BudgetExceeded, sat
from kadt.closure import ParameterSet
from kadt.decide import canonical_for_pair, decide
from kadt.fuzz import fuzz, random_pair
from kadt.generate import all_exprs, random_kat, is_kat
from kadt.guarded import Equal, language_equal, standard_interpret
from kadt.laws import LAWS, law_suite, substitution_pool
from kadt.relational import all_models, bisimulation, relation_rows, satisfies, truth_set, unravel
from kadt.syntax import (
    ONE, ZERO, Prod, Prop, Star, Sum, classify, embed_aka, parse,
)

# pinned tolerances
LAW_POOL = 100
LAW_MAX_SIZE = 6
LAW_SECONDS = 300
SOUND_PAIRS = 500
SOUND_MAX_SIZE = 8
SOUND_MODELS = 100
SOUND_MAX_STATES = 4
EXHAUSTIVE_MAX_SIZE = 4
EXHAUSTIVE_MAX_STATES = 2
EXHAUSTIVE_SECONDS = 30 * 60
KAT_PAIRS = 200
EMBED_PAIRS = 200
BISIM_GAMMAS = 50
BISIM_DEPTH = 3
PERF_GAMMA = 12
PERF_SECONDS = 60
FAIL_FAST_SECONDS = 10


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="module")
def fuzz_run():
    return fuzz(SOUND_PAIRS, SOUND_MAX_SIZE, seed=2024, models=SOUND_MODELS)


def test_criterion_1_law_corpus(capsys):
    pool = substitution_pool(LAW_POOL, seed=0, max_size=LAW_MAX_SIZE)
    assert len(pool) >= 100
    axioms = [l for l in LAWS if l.source == "axiom"]
    derived = [l for l in LAWS if l.source == "derived"]
    assert len(axioms) == 16 and len(derived) == 18
    start = time.perf_counter()
    rep = law_suite(pool, abort=False)
    seconds = time.perf_counter() - start
    conditional = [l.number for l in LAWS if l.kind != "equation"]
    fired = all(rep.triggered.get(n, 0) > 0 for n in conditional)
    ok = rep.ok and seconds < LAW_SECONDS and fired
    report(capsys, 1, ok, f"{rep.checked} instances, {len(rep.failures)} failures, "
                          f"hypotheses fired for all {len(conditional)} conditional laws, {seconds:.0f}s")
    assert rep.ok, [str(f.substitution) for f in rep.failures[:3]]
    assert fired
    assert seconds < LAW_SECONDS


def test_criterion_2_relational_soundness(capsys, fuzz_run):
    equivalent = [r for r in fuzz_run.results if r.equivalent]
    bad = [r for r in equivalent if r.problems]
    ok = not bad and len(fuzz_run.results) == SOUND_PAIRS and equivalent
    report(capsys, 2, ok, f"{len(equivalent)} equivalent verdicts among {SOUND_PAIRS} pairs, "
                          f"each checked in {SOUND_MODELS} random models; {len(bad)} violations")
    assert not bad
    assert equivalent


def test_criterion_3_witness_validity(capsys, fuzz_run):
    nonequivalent = [r for r in fuzz_run.results if not r.equivalent]
    bad = [r for r in nonequivalent if r.problems]
    ok = not bad and nonequivalent
    report(capsys, 3, ok, f"{len(nonequivalent)} nonequivalences, witnesses and countermodels "
                          f"validated: {len(nonequivalent) - len(bad)}")
    assert not bad
    assert nonequivalent


def test_criterion_4_exhaustive_completeness(capsys):
    start = time.perf_counter()
    exprs = all_exprs(EXHAUSTIVE_MAX_SIZE, ("a",), ("p",))
    models = list(all_models(EXHAUSTIVE_MAX_STATES, ["a"], ["p"]))
    signature = [tuple(relation_rows(e, M) for M in models) for e in exprs]
    distinguished = agree = equiv_on_same = 0
    disagreements = []
    for i, j in itertools.combinations(range(len(exprs)), 2):
        verdict = decide(exprs[i], exprs[j], validate=False).equivalent
        if signature[i] != signature[j]:
            distinguished += 1
            if verdict:
                disagreements.append((exprs[i], exprs[j]))
            else:
                agree += 1
        elif verdict:
            equiv_on_same += 1
    seconds = time.perf_counter() - start
    ok = not disagreements and seconds < EXHAUSTIVE_SECONDS
    report(capsys, 4, ok, f"{len(exprs)} expressions, {distinguished} oracle-distinguished pairs, "
                          f"{agree} agree, {len(disagreements)} disagree; "
                          f"{equiv_on_same} equivalent among oracle-same pairs; {seconds:.0f}s")
    assert not disagreements, disagreements[:3]
    assert seconds < EXHAUSTIVE_SECONDS


def test_criterion_5_pdl_sanity(capsys):
    P = lambda t: parse(t, props=["p"])
    unsat = decide(P("<a>p;[a]!p"), ZERO).equivalent
    unfold = decide(P("<a*>p"), P("p + <a><a*>p")).equivalent
    ok_sat, M, x = sat(P("<a*>p"))
    checked = ok_sat and satisfies(M, x, P("<a*>p"))
    ok = unsat and unfold and checked
    report(capsys, 5, ok, f"unsat={unsat} unfold={unfold} sat-model-checked={checked}")
    assert ok


def _kat_variant(rng, e):
    roll = rng.randrange(6)
    if roll == 0:
        return Sum(e, ZERO)
    if roll == 1:
        return Prod(ONE, e)
    if roll == 2:
        return Sum(e, e)
    if roll == 3:
        return Prod(Sum(Prop("p", 0), parse("adom(p)", props=["p"])), e)
    if roll == 4 and isinstance(e, Star):
        return Sum(ONE, Prod(e.body, e))
    return Sum(Star(e), Prod(e, e)) if rng.random() < 0.5 else Star(Star(e))


def _kat_pairs(count, seed):
    rng = random.Random(seed)
    pairs = []
    while len(pairs) < count:
        e = random_kat(rng, rng.randint(1, 7))
        if rng.random() < 0.4:
            f = _kat_variant(rng, e)
            if rng.random() < 0.5:
                f = Sum(f, e)
        else:
            f = random_kat(rng, rng.randint(1, 7))
        if rng.random() < 0.2:
            e, f = Star(e), Sum(ONE, Prod(Star(e), e))
        if is_kat(e) and is_kat(f):
            pairs.append((e, f))
    return pairs


def test_criterion_6_kat_back_compatibility(capsys):
    pi = ParameterSet([Prop("p", 0), Prop("q", 1)])
    mismatches = []
    equal = 0
    for e, f in _kat_pairs(KAT_PAIRS, seed=6):
        kozen_smith = language_equal(standard_interpret(e, pi), standard_interpret(f, pi)) == Equal()
        verdict = decide(e, f).equivalent
        equal += kozen_smith
        if verdict != kozen_smith:
            mismatches.append((e, f))
    ok = not mismatches and 0 < equal < KAT_PAIRS
    report(capsys, 6, ok, f"{KAT_PAIRS} KAT pairs ({equal} equal by guarded strings over "
                          f"propositional atoms), {len(mismatches)} mismatches")
    assert not mismatches, mismatches[:3]
    assert 0 < equal < KAT_PAIRS


def test_criterion_7_embedding(capsys):
    rng = random.Random(7)
    changed = outside = 0
    equal = 0
    for _ in range(EMBED_PAIRS):
        e, f = random_pair(rng, 6, ("a", "b"), ("p", "q"))
        v = decide(e, f).equivalent
        e2, f2 = embed_aka(e), embed_aka(f)
        w = decide(e2, f2).equivalent
        equal += v
        changed += v != w
        outside += "aKA" not in classify(e2) or "aKA" not in classify(f2)
    ok = changed == 0 and outside == 0
    report(capsys, 7, ok, f"{EMBED_PAIRS} pairs ({equal} equivalent), {changed} verdict changes, "
                          f"{outside} embeddings outside aKA")
    assert changed == 0 and outside == 0


def test_criterion_8_bisimulation(capsys):
    rng = random.Random(8)
    disagreements = 0
    gammas = 0
    checked = 0
    while gammas < BISIM_GAMMAS:
        e, f = random_pair(rng, 6)
        C = canonical_for_pair(e, f)
        if C.size > 8:
            continue
        gammas += 1
        M = C.to_relational()
        U, labels = unravel(M, BISIM_DEPTH)
        rel = bisimulation(M, U)
        for i, lab in enumerate(labels):
            for x in M.states:
                if ((x, i) in rel) != (x == lab[-1]):
                    disagreements += 1
        for param in C.gamma:
            tm, tu = truth_set(param, M), truth_set(param, U)
            for x, y in rel:
                checked += 1
                if (tm >> x & 1) != (tu >> y & 1):
                    disagreements += 1
    ok = disagreements == 0
    report(capsys, 8, ok, f"{gammas} parameter sets, {checked} formula checks at bisimilar points, "
                          f"{disagreements} disagreements")
    assert disagreements == 0


def test_criterion_9_performance(capsys):
    rng = random.Random(9)
    P = lambda t: parse(t, props=["p", "q"])
    candidates = [(P("<a*>p"), P("p + <a><a*>p")), (P("[a*](p;q)"), P("[a*](p;q);[a*]p")),
                  (P("<a;b*>p"), P("<a>(p + <b><b*>p)"))]
    queries, sizes = [], []
    large = 0
    while len(queries) < 100:
        e, f = candidates.pop() if candidates else random_pair(rng, 12, ("a", "b"), ("p", "q"))
        n = len(canonical_for_pair(e, f).gamma)
        if n <= PERF_GAMMA and (n >= 10 or large >= 30):
            queries.append((e, f))
            sizes.append(n)
            large += n >= 10
    worst = 0.0
    for e, f in queries:
        start = time.perf_counter()
        decide(e, f)
        worst = max(worst, time.perf_counter() - start)
    big = P("[(a+b)*](<a>p + <b>q) ; <(a;b)*>(p;q) ; [b*]<a*>!p")
    start = time.perf_counter()
    try:
        decide(big, ZERO, max_atoms=64)
        failed_fast = False
        message = ""
    except BudgetExceeded as exc:
        message = str(exc)
        failed_fast = time.perf_counter() - start < FAIL_FAST_SECONDS
    ok = worst < PERF_SECONDS and failed_fast and "|Gamma|" in message
    report(capsys, 9, ok, f"{len(sizes)} queries with |Gamma| <= {PERF_GAMMA} ({large} with |Gamma| >= 10), "
                          f"slowest {worst:.2f}s; over-budget query: {message!r}")
    assert worst < PERF_SECONDS
    assert failed_fast and "|Gamma|" in message
