"""The law corpus: congruence axioms and derived laws as templates, a pool
of substitutions, and the law-suite runner."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable

from .decide import decide
from .generate import random_expr, random_formula
from .syntax import ONE, ZERO, Anti, Dom, Expr, Prod, Prop, Star, Sum, to_text

# a relation between two expressions: ("eq" | "leq", left, right)
Rel = tuple


def eq(l, r) -> Rel:
    return ("eq", l, r)


def leq(l, r) -> Rel:
    return ("leq", l, r)


@dataclass(frozen=True)
class Substitution:
    e: Expr
    f: Expr
    g: Expr
    phi: Expr
    psi: Expr
    p: Expr = Prop("p", 0)

    def replace(self, **kw) -> "Substitution":
        d = dict(e=self.e, f=self.f, g=self.g, phi=self.phi, psi=self.psi, p=self.p)
        d.update(kw)
        return Substitution(**d)

    def __str__(self):
        return ", ".join(f"{k}={to_text(v)}" for k, v in
                         (("e", self.e), ("f", self.f), ("g", self.g),
                          ("phi", self.phi), ("psi", self.psi), ("p", self.p)))


@dataclass(frozen=True)
class LawEntry:
    number: int
    name: str
    kind: str                     # "equation" | "conditional" | "iff"
    source: str                   # "axiom" | "derived"
    build: Callable[[Substitution], tuple[list[Rel], list[Rel]]]
    # substitution tweak that makes the hypotheses true, for conditionals
    satisfy: Callable[[Substitution], Substitution] | None = field(default=None, compare=False)


def _law(number, name, kind, source, build, satisfy=None):
    return LawEntry(number, name, kind, source, build, satisfy)


def _t(x):
    return Dom(x)


def _bar(x):
    return Anti(x)


LAWS: tuple[LawEntry, ...] = (
    _law(1, "product associative", "equation", "axiom",
         lambda s: ([], [eq(Prod(Prod(s.e, s.f), s.g), Prod(s.e, Prod(s.f, s.g)))])),
    _law(2, "one is a unit", "equation", "axiom",
         lambda s: ([], [eq(Prod(s.e, ONE), s.e), eq(s.e, Prod(ONE, s.e))])),
    _law(3, "sum associative", "equation", "axiom",
         lambda s: ([], [eq(Sum(Sum(s.e, s.f), s.g), Sum(s.e, Sum(s.f, s.g)))])),
    _law(4, "zero is a unit of sum", "equation", "axiom",
         lambda s: ([], [eq(Sum(ZERO, s.e), s.e), eq(s.e, Sum(s.e, ZERO))])),
    _law(5, "sum idempotent", "equation", "axiom",
         lambda s: ([], [eq(s.e, Sum(s.e, s.e))])),
    _law(6, "left distributive", "equation", "axiom",
         lambda s: ([], [eq(Prod(s.e, Sum(s.f, s.g)), Sum(Prod(s.e, s.f), Prod(s.e, s.g)))])),
    _law(7, "right distributive", "equation", "axiom",
         lambda s: ([], [eq(Prod(Sum(s.e, s.f), s.g), Sum(Prod(s.e, s.g), Prod(s.f, s.g)))])),
    _law(8, "star unfold right", "equation", "axiom",
         lambda s: ([], [leq(Sum(ONE, Prod(s.e, Star(s.e))), Star(s.e))])),
    _law(9, "star unfold left", "equation", "axiom",
         lambda s: ([], [leq(Sum(ONE, Prod(Star(s.e), s.e)), Star(s.e))])),
    _law(10, "star induction right", "conditional", "axiom",
         lambda s: ([leq(Sum(s.f, Prod(s.e, s.g)), s.g)], [leq(Prod(Star(s.e), s.f), s.g)]),
         lambda s: s.replace(g=Prod(Star(s.e), s.f))),
    _law(11, "star induction left", "conditional", "axiom",
         lambda s: ([leq(Sum(s.f, Prod(s.g, s.e)), s.g)], [leq(Prod(s.f, Star(s.e)), s.g)]),
         lambda s: s.replace(g=Prod(s.f, Star(s.e)))),
    _law(12, "antidomain annihilates", "equation", "axiom",
         lambda s: ([], [eq(Prod(_bar(s.e), s.e), ZERO)])),
    _law(13, "antidomain locality", "equation", "axiom",
         lambda s: ([], [eq(_bar(Prod(s.e, s.f)), _bar(Prod(s.e, _t(s.f))))])),
    _law(14, "antidomain excluded middle", "equation", "axiom",
         lambda s: ([], [eq(Sum(_bar(s.e), _t(s.e)), ONE)])),
    _law(15, "domain of a proposition", "equation", "axiom",
         lambda s: ([], [eq(_t(s.p), s.p)])),
    _law(16, "domain is double antidomain", "equation", "axiom",
         lambda s: ([], [eq(_t(s.e), _bar(_bar(s.e)))])),
    _law(17, "antidomain is a fixpoint of domain", "equation", "derived",
         lambda s: ([], [eq(_t(_bar(s.e)), _bar(s.e))])),
    _law(18, "antidomain of one", "equation", "derived",
         lambda s: ([], [eq(_bar(ONE), ZERO)])),
    _law(19, "antidomain of zero", "equation", "derived",
         lambda s: ([], [eq(_bar(ZERO), ONE)])),
    _law(20, "domain distributes over sum", "equation", "derived",
         lambda s: ([], [eq(_t(Sum(s.e, s.f)), Sum(_t(s.e), _t(s.f)))])),
    _law(21, "domain of a guarded product", "equation", "derived",
         lambda s: ([], [eq(_t(Prod(_t(s.e), s.f)), Prod(_t(s.e), _t(s.f)))])),
    _law(22, "domain preserves", "equation", "derived",
         lambda s: ([], [eq(Prod(_t(s.e), s.e), s.e)])),
    _law(23, "domain of a star", "equation", "derived",
         lambda s: ([], [eq(_t(Star(s.e)), ONE)])),
    _law(24, "zero test through domain", "iff", "derived",
         lambda s: ([eq(Prod(s.e, _t(s.f)), ZERO)], [eq(Prod(s.e, s.f), ZERO)]),
         lambda s: s.replace(e=Prod(s.e, _bar(s.f)))),
    _law(25, "formula contradiction", "equation", "derived",
         lambda s: ([], [eq(Prod(s.phi, _bar(s.phi)), ZERO)])),
    _law(26, "formula excluded middle", "equation", "derived",
         lambda s: ([], [eq(Sum(s.phi, _bar(s.phi)), ONE)])),
    _law(27, "double complement", "equation", "derived",
         lambda s: ([], [eq(_bar(_bar(s.phi)), s.phi)])),
    _law(28, "contraposition", "iff", "derived",
         lambda s: ([eq(Prod(s.phi, s.e), ZERO)], [leq(s.phi, _bar(s.e))]),
         lambda s: s.replace(phi=Prod(s.phi, _bar(s.e)))),
    _law(29, "formula idempotent", "equation", "derived",
         lambda s: ([], [eq(Prod(s.phi, s.phi), s.phi)])),
    _law(30, "formulas commute", "equation", "derived",
         lambda s: ([], [eq(Prod(s.phi, s.psi), Prod(s.psi, s.phi))])),
    _law(31, "domain of a formula", "equation", "derived",
         lambda s: ([], [eq(_t(s.phi), s.phi)])),
    _law(32, "diamond star invariance", "conditional", "derived",
         lambda s: ([leq(_t(Prod(s.e, s.phi)), s.phi)], [leq(_t(Prod(Star(s.e), s.phi)), s.phi)]),
         lambda s: s.replace(phi=_t(Prod(Star(s.e), s.phi)))),
    _law(33, "box star invariance", "conditional", "derived",
         lambda s: ([leq(s.phi, _bar(Prod(s.e, _bar(s.phi))))],
                    [leq(s.phi, _bar(Prod(Star(s.e), _bar(s.phi))))]),
         lambda s: s.replace(phi=_bar(Prod(Star(s.e), _bar(s.phi))))),
    _law(34, "guarded star commutation", "conditional", "derived",
         lambda s: ([leq(Prod(s.e, s.phi), Prod(s.phi, Prod(s.e, s.phi)))],
                    [leq(Prod(Star(s.e), s.phi), Prod(s.phi, Prod(Star(s.e), s.phi)))]),
         lambda s: s.replace(e=Prod(s.phi, s.e))),
)


def substitution_pool(count: int = 100, seed: int = 0, max_size: int = 6,
                      actions=("a", "b"), props=("p",)) -> list[Substitution]:
    """Random substitutions: programs of size at most ``max_size`` and
    formulas of size at most ``max_size``."""
    rng = random.Random(seed)
    pool = []
    for _ in range(count):
        def prog():
            return random_expr(rng, rng.randint(1, max_size), actions, props)

        def form():
            return random_formula(rng, rng.randint(1, max_size), actions, props)
        pool.append(Substitution(prog(), prog(), prog(), form(), form(),
                                 Prop(props[0], 0)))
    return pool


def holds(rel: Rel, **kw) -> bool:
    kind, l, r = rel
    if kind == "leq":
        return decide(Sum(l, r), r, **kw).equivalent
    return decide(l, r, **kw).equivalent


@dataclass
class InstanceResult:
    law: LawEntry
    substitution: Substitution
    hypotheses_hold: bool | None
    passed: bool


class LawFailure(AssertionError):
    pass


def check_instance(law: LawEntry, s: Substitution, **kw) -> InstanceResult:
    hyps, concl = law.build(s)
    if law.kind == "equation":
        return InstanceResult(law, s, None, all(holds(r, **kw) for r in concl))
    h = all(holds(r, **kw) for r in hyps)
    c = all(holds(r, **kw) for r in concl)
    if law.kind == "iff":
        return InstanceResult(law, s, h, h == c)
    return InstanceResult(law, s, h, (not h) or c)


def instances(law: LawEntry, pool: list[Substitution]) -> list[Substitution]:
    """The pool, plus for conditional laws a tweaked copy of each
    substitution under which the hypotheses are meant to hold."""
    out = list(pool)
    if law.satisfy is not None:
        out += [law.satisfy(s) for s in pool]
    return out


@dataclass
class SuiteReport:
    checked: int = 0
    failures: list = field(default_factory=list)
    triggered: dict = field(default_factory=dict)   # law number -> hypotheses true count
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures


def law_suite(pool: list[Substitution], laws=LAWS, abort: bool = True, progress=None, **kw) -> SuiteReport:
    report = SuiteReport()
    start = time.perf_counter()
    for law in laws:
        seen = set()
        for s in instances(law, pool):
            hyps, concl = law.build(s)
            key = (tuple(hyps), tuple(concl))
            if key in seen:
                continue
            seen.add(key)
            res = check_instance(law, s, **kw)
            report.checked += 1
            if res.hypotheses_hold:
                report.triggered[law.number] = report.triggered.get(law.number, 0) + 1
            if not res.passed:
                report.failures.append(res)
                if abort:
                    report.seconds = time.perf_counter() - start
                    raise LawFailure(f"law {law.number} ({law.name}) fails for {s}")
        if progress:
            progress(law, report)
    report.seconds = time.perf_counter() - start
    return report
