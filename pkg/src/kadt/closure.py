"""Fischer--Ladner closure of finite sets of parameters."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator

from .syntax import (
    ONE, ZERO, Act, Anti, Dom, Expr, Prod, Prop, Star, Sum,
    is_formula, is_parameter, st, to_text,
)


class NotAParameter(ValueError):
    pass


class ClosureTooLarge(RuntimeError):
    pass


class ParameterSet:
    """A finite set of parameters in canonical (printed-form) order."""

    __slots__ = ("members", "_index", "_hash")

    def __init__(self, members: Iterable[Expr] = ()):
        uniq = set(members)
        for m in uniq:
            if not is_parameter(m):
                raise NotAParameter(f"{to_text(m)} is not a parameter")
        self.members = tuple(sorted(uniq, key=lambda m: (to_text(m), repr(m))))
        self._index = {m: i for i, m in enumerate(self.members)}
        self._hash = hash(self.members)

    def __len__(self):
        return len(self.members)

    def __iter__(self) -> Iterator[Expr]:
        return iter(self.members)

    def __contains__(self, item) -> bool:
        return item in self._index

    def __getitem__(self, i: int) -> Expr:
        return self.members[i]

    def index(self, item: Expr) -> int:
        return self._index[item]

    def get(self, item: Expr) -> int | None:
        return self._index.get(item)

    def __eq__(self, other):
        return isinstance(other, ParameterSet) and self.members == other.members

    def __hash__(self):
        return self._hash

    def __le__(self, other: "ParameterSet") -> bool:
        return all(m in other for m in self.members)

    def __repr__(self):
        return "ParameterSet([" + ", ".join(to_text(m) for m in self.members) + "])"

    def actions(self) -> set[str]:
        out = set()
        for m in self.members:
            stack = [m]
            while stack:
                n = stack.pop()
                if isinstance(n, Act):
                    out.add(n.name)
                elif isinstance(n, (Sum, Prod)):
                    stack += [n.left, n.right]
                elif isinstance(n, (Star, Anti, Dom)):
                    stack.append(n.body)
        return out


def ends_in_formula(e: Expr) -> bool:
    """True for ``f . phi`` with ``phi`` a formula (the diamond shape)."""
    return isinstance(e, Prod) and is_formula(e.right)


def _dd(e: Expr) -> Expr:
    return Anti(Anti(e))


def padded(e: Expr) -> Expr:
    """The test standing for ``e``'s domain inside a closed set: ``(e . 1)?``
    unless ``e`` already ends in a formula, in which case ``e?`` itself."""
    return Dom(e) if ends_in_formula(e) else Dom(Prod(e, ONE))


def requirements(param: Expr, literal: bool = False) -> Iterator[Expr]:
    """Parameters that must accompany ``param`` in a closed set.

    ``literal=True`` selects the unamended clauses: the sum clause demands
    ``(e . f)`` instead of ``(e . phi)`` and every ``e`` other than
    ``f . 1`` is padded. That variant is kept for comparison only; it does
    not terminate on diamonds such as ``(a;p)?``.
    """
    if isinstance(param, Prop):
        return
    e = param.body
    if isinstance(e, Prop):
        yield e
    if is_formula(e) and isinstance(e, (Sum, Prod)):
        yield Dom(e.left)
        yield Dom(e.right)
    if isinstance(e, Star):
        yield Dom(e.body)
    if isinstance(e, Anti):
        yield Dom(Prod(e.body, ONE)) if literal else padded(e.body)
    if literal:
        if not (isinstance(e, Prod) and e.right == ONE):
            yield Dom(Prod(e, ONE))
    elif ends_in_formula(e):
        yield Dom(e.right)
    else:
        yield Dom(Prod(e, ONE))
    if ends_in_formula(e):
        prog, phi = e.left, e.right
        if isinstance(prog, Sum):
            if literal:
                yield Dom(Prod(prog.left, prog.right))
            else:
                yield Dom(Prod(prog.left, phi))
            yield Dom(Prod(prog.right, phi))
        elif isinstance(prog, Prod):
            yield Dom(Prod(prog.right, phi))
            yield Dom(Prod(prog.left, _dd(Prod(prog.right, phi))))
        elif isinstance(prog, Star):
            yield Dom(Prod(prog.body, _dd(Prod(prog, phi))))


BASE = (Dom(ONE), Dom(ZERO))


def fl_close(params: Iterable[Expr], literal: bool = False,
             limit: int = 100_000) -> ParameterSet:
    """Least closed superset of ``params`` (worklist fixpoint)."""
    seen: dict[Expr, None] = {}
    work: deque[Expr] = deque()
    for p in list(params) + list(BASE):
        if not is_parameter(p):
            raise NotAParameter(f"{to_text(p)} is not a parameter")
        if p not in seen:
            seen[p] = None
            work.append(p)
    while work:
        p = work.popleft()
        for q in requirements(p, literal):
            if q not in seen:
                seen[q] = None
                work.append(q)
                if len(seen) > limit:
                    raise ClosureTooLarge(f"closure exceeds {limit} parameters")
    return ParameterSet(seen)


def is_fl_closed(gamma: Iterable[Expr], literal: bool = False) -> bool:
    members = set(gamma)
    if not all(b in members for b in BASE):
        return False
    return all(q in members for p in members for q in requirements(p, literal))


def gamma_for(exprs: Iterable[Expr], **kw) -> ParameterSet:
    """Closure of the tests of all subformulas of ``exprs``."""
    return fl_close(st(exprs), **kw)
