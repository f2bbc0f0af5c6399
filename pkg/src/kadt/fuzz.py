"""Randomized cross-checking of the decision procedure against the
relational semantics."""

from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .decide import decide
from .generate import random_expr
from .guarded import member
from .decide import canonical_for_pair
from .relational import brute_oracle, Distinguished, random_model, relation_rows
from .syntax import (
    ONE, ZERO, Anti, Dom, Expr, Prod, Star, Sum,
    actions as actions_of, propositions, question, to_text,
)

log = logging.getLogger(__name__)


def equivalent_variant(rng: random.Random, e: Expr, depth: int = 2) -> Expr:
    """An expression equivalent to ``e`` by a few sound rewrites."""
    for _ in range(depth):
        roll = rng.randrange(9)
        if roll == 0:
            e = Sum(e, ZERO) if rng.random() < 0.5 else Sum(ZERO, e)
        elif roll == 1:
            e = Prod(e, ONE) if rng.random() < 0.5 else Prod(ONE, e)
        elif roll == 2:
            e = Sum(e, e)
        elif roll == 3:
            e = Prod(Dom(e), e)
        elif roll == 4 and isinstance(e, Star):
            e = Sum(ONE, Prod(e.body, e))
        elif roll == 5 and isinstance(e, Dom):
            e = Anti(Anti(e.body))
        elif roll == 6 and isinstance(e, (Sum, Prod)) and isinstance(e.left, type(e)):
            e = type(e)(e.left.left, type(e)(e.left.right, e.right))
        elif roll == 7 and isinstance(e, Prod) and isinstance(e.right, Sum):
            e = Sum(Prod(e.left, e.right.left), Prod(e.left, e.right.right))
        elif roll == 8 and isinstance(e, Dom):
            e = question(e)
        else:
            e = Sum(e, Prod(Anti(ONE), e))
    return e


def random_pair(rng: random.Random, max_size: int, actions=("a", "b"), props=("p",)) -> tuple[Expr, Expr]:
    e = random_expr(rng, rng.randint(1, max_size), actions, props)
    if rng.random() < 0.35:
        return e, equivalent_variant(rng, e)
    return e, random_expr(rng, rng.randint(1, max_size), actions, props)


@dataclass
class PairResult:
    index: int
    left: str
    right: str
    equivalent: bool
    problems: list[str]


def check_pair(e: Expr, f: Expr, rng: random.Random, models: int = 100, max_states: int = 4,
               brute_states: int = 0) -> tuple[bool, list[str]]:
    """Decide and validate one pair; returns the verdict class and a list of
    violated checks (empty when everything agrees)."""
    problems = []
    v = decide(e, f, validate=False)
    acts = sorted(actions_of(e) | actions_of(f))
    props = sorted(propositions(e) | propositions(f))
    if v.equivalent:
        for _ in range(models):
            M = random_model(rng, rng.randint(1, max_states), acts, props)
            if relation_rows(e, M) != relation_rows(f, M):
                problems.append(f"equivalent but separated by {M.to_dict()}")
                break
    else:
        C = canonical_for_pair(e, f)
        if member(v.witness, e, C) == member(v.witness, f, C):
            problems.append(f"witness {v.witness} separates nothing")
        M = v.countermodel
        in_e = bool(relation_rows(e, M)[v.point] >> v.target & 1)
        in_f = bool(relation_rows(f, M)[v.point] >> v.target & 1)
        if in_e == in_f or (v.side == "left") != in_e:
            problems.append("countermodel does not separate the pair")
    if brute_states:
        oracle = brute_oracle(e, f, brute_states, acts, props)
        if v.equivalent and isinstance(oracle, Distinguished):
            problems.append("brute-force oracle separates an equivalent pair")
    return v.equivalent, problems


def _task(args) -> PairResult:
    seed, index, max_size, models, brute_states = args
    rng = random.Random(f"{seed}:{index}")
    e, f = random_pair(rng, max_size)
    equivalent, problems = check_pair(e, f, rng, models, brute_states=brute_states)
    return PairResult(index, to_text(e), to_text(f), equivalent, problems)


@dataclass
class FuzzReport:
    seed: int
    results: list[PairResult] = field(default_factory=list)

    @property
    def equivalent(self) -> int:
        return sum(r.equivalent for r in self.results)

    @property
    def nonequivalent(self) -> int:
        return len(self.results) - self.equivalent

    @property
    def failures(self) -> list[PairResult]:
        return [r for r in self.results if r.problems]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        return (f"seed {self.seed}: {len(self.results)} pairs, {self.equivalent} equivalent, "
                f"{self.nonequivalent} nonequivalent, {len(self.failures)} failures")


def fuzz(count: int = 100, max_size: int = 6, seed: int = 0, models: int = 100,
         brute_states: int = 0, jobs: int = 1) -> FuzzReport:
    """Each pair gets its own generator seeded by ``(seed, index)``."""
    log.info("fuzz seed %d", seed)
    tasks = [(seed, i, max_size, models, brute_states) for i in range(count)]
    report = FuzzReport(seed)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            report.results = list(pool.map(_task, tasks, chunksize=8))
    else:
        report.results = [_task(t) for t in tasks]
    return report
