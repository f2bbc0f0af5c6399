"""Random and exhaustive generation of expressions and relational models."""

from __future__ import annotations

import itertools
import random
from typing import Iterator, Sequence

from .syntax import (
    ONE, ZERO, Act, Anti, Dom, Expr, Prod, Prop, Star, Sum, is_formula,
)

UNARY = (Star, Anti, Dom)
BINARY = (Sum, Prod)


def leaves(actions: Sequence[str], props: Sequence[str]) -> list[Expr]:
    return ([Act(a, i) for i, a in enumerate(actions)]
            + [Prop(p, i) for i, p in enumerate(props)] + [ZERO, ONE])


def random_expr(rng: random.Random, size: int, actions=("a", "b"), props=("p",)) -> Expr:
    """A uniformly shaped random expression with exactly ``size`` nodes."""
    if size <= 1:
        return rng.choice(leaves(actions, props))
    if size == 2 or rng.random() < 0.4:
        return rng.choice(UNARY)(random_expr(rng, size - 1, actions, props))
    left = rng.randint(1, size - 2)
    op = rng.choice(BINARY)
    return op(random_expr(rng, left, actions, props),
              random_expr(rng, size - 1 - left, actions, props))


def random_formula(rng: random.Random, size: int, actions=("a", "b"), props=("p",)) -> Expr:
    """Random formula with at most ``size`` nodes."""
    if size <= 1:
        return rng.choice([Prop(p, i) for i, p in enumerate(props)] + [ZERO, ONE])
    roll = rng.random()
    if roll < 0.5:
        op = rng.choice((Anti, Dom))
        return op(random_expr(rng, size - 1, actions, props))
    if size >= 3:
        left = rng.randint(1, size - 2)
        op = rng.choice(BINARY)
        return op(random_formula(rng, left, actions, props),
                  random_formula(rng, size - 1 - left, actions, props))
    return Anti(random_formula(rng, 1, actions, props))


def exprs_of_size(n: int, actions=("a",), props=("p",)) -> Iterator[Expr]:
    if n == 1:
        yield from leaves(actions, props)
        return
    for sub in exprs_of_size(n - 1, actions, props):
        for op in UNARY:
            yield op(sub)
    for k in range(1, n - 1):
        lefts = list(exprs_of_size(k, actions, props))
        rights = list(exprs_of_size(n - 1 - k, actions, props))
        for op in BINARY:
            for l, r in itertools.product(lefts, rights):
                yield op(l, r)


def all_exprs(max_size: int, actions=("a",), props=("p",)) -> list[Expr]:
    out = []
    for n in range(1, max_size + 1):
        out.extend(exprs_of_size(n, actions, props))
    return out


def is_kat(e: Expr) -> bool:
    from .syntax import in_fragment
    return in_fragment(e, "KAT")


def random_kat(rng: random.Random, size: int, actions=("a", "b"), props=("p", "q")) -> Expr:
    """Random KAT expression: antidomain only on propositions, no domain."""
    if size <= 1:
        return rng.choice(leaves(actions, props))
    if size == 2:
        if rng.random() < 0.5:
            return Anti(Prop(*_pick_prop(rng, props)))
        return Star(random_kat(rng, 1, actions, props))
    if rng.random() < 0.2:
        return Star(random_kat(rng, size - 1, actions, props))
    left = rng.randint(1, size - 2)
    op = rng.choice(BINARY)
    return op(random_kat(rng, left, actions, props), random_kat(rng, size - 1 - left, actions, props))


def _pick_prop(rng, props):
    i = rng.randrange(len(props))
    return props[i], i


__all__ = [
    "random_expr", "random_formula", "exprs_of_size", "all_exprs", "random_kat", "is_kat",
    "leaves", "is_formula",
]
