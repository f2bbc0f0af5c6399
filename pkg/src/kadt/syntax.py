"""Regular expressions with dynamic tests: syntax trees, parsing, printing
and the structural analyses the decision procedure needs."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class Expr:
    """Base class of expression nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def __add__(self, other: "Expr") -> "Expr":
        return Sum(self, other)

    def __mul__(self, other: "Expr") -> "Expr":
        return Prod(self, other)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, repr=False)
class Act(Expr):
    name: str
    # position in the declaration order; only used by embed_aka
    index: int = field(default=0, compare=False)

    def __repr__(self):
        return f"Act({self.name!r})"


@dataclass(frozen=True, repr=False)
class Prop(Expr):
    name: str
    index: int = field(default=0, compare=False)

    def __repr__(self):
        return f"Prop({self.name!r})"


@dataclass(frozen=True, repr=False)
class _Const(Expr):
    value: int

    def __repr__(self):
        return "One" if self.value else "Zero"


ZERO = _Const(0)
ONE = _Const(1)
Zero, One = ZERO, ONE


@dataclass(frozen=True)
class Sum(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Prod(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Star(Expr):
    body: Expr


@dataclass(frozen=True)
class Anti(Expr):
    """Antidomain: holds where ``body`` has no outgoing computation."""

    body: Expr


@dataclass(frozen=True)
class Dom(Expr):
    """Domain: holds where ``body`` has some outgoing computation."""

    body: Expr


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NotAFormula(TypeError):
    pass


# --------------------------------------------------------------------------
# traversal and structural predicates


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Sum, Prod)):
        return (e.left, e.right)
    if isinstance(e, (Star, Anti, Dom)):
        return (e.body,)
    return ()


def subexpressions(e: Expr) -> Iterator[Expr]:
    """All subexpressions of ``e`` (including ``e``), pre-order, with repeats."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def size(e: Expr) -> int:
    return sum(1 for _ in subexpressions(e))


def actions(e: Expr) -> set[str]:
    return {n.name for n in subexpressions(e) if isinstance(n, Act)}


def propositions(e: Expr) -> set[str]:
    return {n.name for n in subexpressions(e) if isinstance(n, Prop)}


def is_formula(e: Expr) -> bool:
    if isinstance(e, (Prop, _Const, Anti, Dom)):
        return True
    if isinstance(e, (Sum, Prod)):
        return is_formula(e.left) and is_formula(e.right)
    return False


def is_testable(e: Expr) -> bool:
    return not any(isinstance(n, Dom) for n in subexpressions(e))


def is_test(e: Expr) -> bool:
    return isinstance(e, Dom) and is_testable(e.body)


def is_parameter(e: Expr) -> bool:
    return isinstance(e, Prop) or is_test(e)


def subformulas(e: Expr) -> set[Expr]:
    """Subexpressions of ``e`` that are formulas; ``e`` itself counts."""
    return {n for n in subexpressions(e) if is_formula(n)}


def strip_domain(e: Expr) -> Expr:
    """Replace every domain node by a double antidomain."""
    if isinstance(e, Dom):
        return Anti(Anti(strip_domain(e.body)))
    if isinstance(e, Sum):
        return Sum(strip_domain(e.left), strip_domain(e.right))
    if isinstance(e, Prod):
        return Prod(strip_domain(e.left), strip_domain(e.right))
    if isinstance(e, Star):
        return Star(strip_domain(e.body))
    if isinstance(e, Anti):
        return Anti(strip_domain(e.body))
    return e


def question(e: Expr) -> Expr:
    """The test ``e?``: the domain of the domain-free form of ``e``."""
    return Dom(strip_domain(e))


def st(exprs: Iterable[Expr]) -> set[Expr]:
    return {question(f) for e in exprs for f in subformulas(e)}


# --------------------------------------------------------------------------
# PDL sugar


def _require_formula(*args: Expr) -> None:
    for a in args:
        if not is_formula(a):
            raise NotAFormula(f"{to_text(a)} is not a formula")


def diamond(e: Expr, phi: Expr) -> Expr:
    _require_formula(phi)
    return Anti(Anti(Prod(e, phi)))


def box(e: Expr, phi: Expr) -> Expr:
    _require_formula(phi)
    return Anti(Prod(e, Anti(phi)))


def neg(phi: Expr) -> Expr:
    _require_formula(phi)
    return Anti(phi)


def conj(phi: Expr, psi: Expr) -> Expr:
    _require_formula(phi, psi)
    return Prod(phi, psi)


def disj(phi: Expr, psi: Expr) -> Expr:
    _require_formula(phi, psi)
    return Sum(phi, psi)


def test(phi: Expr) -> Expr:
    _require_formula(phi)
    return Dom(phi)


test.__test__ = False  # keep pytest from collecting it


def sum_of(terms: Iterable[Expr]) -> Expr:
    """Right-nested sum; the empty sum is ``0``."""
    terms = list(terms)
    if not terms:
        return ZERO
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = Sum(t, out)
    return out


def prod_of(terms: Iterable[Expr]) -> Expr:
    terms = list(terms)
    if not terms:
        return ONE
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = Prod(t, out)
    return out


# --------------------------------------------------------------------------
# fragments

FRAGMENTS = ("KA", "KA_Phi", "dKA", "aKA", "KAT", "KAT_Phi", "dKAT", "aKAT")

# fragment -> (base admits propositions, base admits Phi, domain rule, antidomain rule)
# rule values: None (never), "self" (any member of the fragment), "prop", "phi"
_ROWS = {
    "KA": (False, False, None, None),
    "KA_Phi": (True, True, None, None),
    "dKA": (False, False, "self", None),
    "aKA": (False, False, "self", "self"),
    "KAT": (True, False, None, "prop"),
    "KAT_Phi": (True, True, None, "phi"),
    "dKAT": (True, False, "self", "prop"),
    "aKAT": (True, False, "self", "self"),
}

# upward edges of the fragment lattice
FRAGMENT_EDGES = (
    ("KA", "KAT"), ("KAT", "dKAT"), ("dKAT", "aKAT"), ("KA", "dKA"),
    ("dKA", "dKAT"), ("dKA", "aKA"), ("aKA", "aKAT"), ("KAT", "KAT_Phi"),
    ("KA", "KA_Phi"), ("KAT_Phi", "aKAT"), ("KA_Phi", "KAT_Phi"),
)


def in_fragment(e: Expr, fragment: str, phi: Iterable[Expr] = ()) -> bool:
    """Membership of ``e`` in a fragment. ``phi`` is the parameter set of
    ``KA_Phi``/``KAT_Phi`` (it implicitly extends the propositions)."""
    try:
        props_ok, phi_ok, dom_rule, anti_rule = _ROWS[fragment]
    except KeyError:
        raise ValueError(f"unknown fragment {fragment!r}") from None
    phi = frozenset(phi) if phi_ok else frozenset()

    def allowed(rule, body):
        if rule == "self":
            return check(body)
        if rule == "prop":
            return isinstance(body, Prop)
        if rule == "phi":
            return isinstance(body, Prop) or body in phi
        return False

    def check(x):
        if isinstance(x, (Act, _Const)) or x in phi:
            return True
        if isinstance(x, Prop):
            return props_ok
        if isinstance(x, (Sum, Prod)):
            return check(x.left) and check(x.right)
        if isinstance(x, Star):
            return check(x.body)
        if isinstance(x, Dom):
            return allowed(dom_rule, x.body)
        if isinstance(x, Anti):
            return allowed(anti_rule, x.body)
        return False

    return check(e)


def classify(e: Expr, phi: Iterable[Expr] = ()) -> set[str]:
    phi = tuple(phi)
    return {k for k in FRAGMENTS if in_fragment(e, k, phi)}


# --------------------------------------------------------------------------
# embedding into the action-only fragment


def embed_aka(e: Expr) -> Expr:
    """Replace ``a_n`` by ``a_2n`` and ``p_n`` by the domain of a fresh action
    ``a_2n+1``. The new action keeps the proposition's name, which is safe
    because action and proposition names never overlap."""
    if isinstance(e, Act):
        return Act(e.name, 2 * e.index)
    if isinstance(e, Prop):
        return Dom(Act(e.name, 2 * e.index + 1))
    if isinstance(e, Sum):
        return Sum(embed_aka(e.left), embed_aka(e.right))
    if isinstance(e, Prod):
        return Prod(embed_aka(e.left), embed_aka(e.right))
    if isinstance(e, Star):
        return Star(embed_aka(e.body))
    if isinstance(e, Anti):
        return Anti(embed_aka(e.body))
    if isinstance(e, Dom):
        return Dom(embed_aka(e.body))
    return e


# --------------------------------------------------------------------------
# printing

_SUM, _PROD, _UNARY = 0, 1, 2


def to_text(e: Expr) -> str:
    return _show(e, _SUM)


def _wrap(text: str, own: int, ctx: int) -> str:
    return f"({text})" if own < ctx else text


def _show(e: Expr, ctx: int) -> str:
    if isinstance(e, (Act, Prop)):
        return e.name
    if isinstance(e, _Const):
        return str(e.value)
    if isinstance(e, Sum):
        return _wrap(f"{_show(e.left, _SUM)} + {_show(e.right, _PROD)}", _SUM, ctx)
    if isinstance(e, Prod):
        return _wrap(f"{_show(e.left, _PROD)};{_show(e.right, _UNARY)}", _PROD, ctx)
    if isinstance(e, Star):
        return f"{_show(e.body, _UNARY)}*"
    if isinstance(e, Anti):
        return f"adom({_show(e.body, _SUM)})"
    if isinstance(e, Dom):
        return f"dom({_show(e.body, _SUM)})"
    raise TypeError(e)


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_']*)|(\d+)|(.))")
_RESERVED = {"dom", "adom", "props"}


class Signature:
    """Declared propositions plus the actions seen so far, with indices.

    Propositions are indexed by declaration order, actions by first
    appearance; one signature shared across several parses keeps the
    indices consistent.
    """

    def __init__(self, props: Iterable[str] = (), actions: Iterable[str] = ()):
        self.props: dict[str, int] = {}
        self.actions: dict[str, int] = {}
        for p in props:
            self.declare_prop(p)
        for a in actions:
            self.action(a)

    def declare_prop(self, name: str) -> None:
        if name in self.actions:
            raise ValueError(f"{name!r} used both as action and proposition")
        self.props.setdefault(name, len(self.props))

    def action(self, name: str) -> Act:
        if name not in self.actions:
            self.actions[name] = len(self.actions)
        return Act(name, self.actions[name])

    def prop(self, name: str) -> Prop:
        return Prop(name, self.props[name])


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.sig = sig
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            start = m.start(m.lastindex)
            if m.group(1):
                self.tokens.append(("id", m.group(1), start))
            elif m.group(2):
                self.tokens.append(("num", m.group(2), start))
            else:
                self.tokens.append(("op", m.group(3), start))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.next()
        if v != value or kind == "end":
            raise ExprSyntaxError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def prelude(self):
        kind, v, _ = self.peek()
        if kind == "id" and v == "props":
            self.next()
            while True:
                kind, v, pos = self.next()
                if kind == "op" and v == ";":
                    break
                if kind != "id" or v in _RESERVED:
                    raise ExprSyntaxError("bad proposition declaration", pos)
                self.sig.declare_prop(v)

    def parse(self) -> Expr:
        self.prelude()
        e = self.sum()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {v!r}", pos)
        return e

    def sum(self) -> Expr:
        e = self.prod()
        while self.peek()[1] == "+" and self.peek()[0] == "op":
            self.next()
            e = Sum(e, self.prod())
        return e

    def prod(self) -> Expr:
        e = self.unary()
        while self.peek()[1] == ";" and self.peek()[0] == "op":
            self.next()
            e = Prod(e, self.unary())
        return e

    def unary(self) -> Expr:
        kind, v, pos = self.peek()
        if kind == "op" and v == "!":
            self.next()
            e = self._formula(self.unary(), pos)
            return Anti(e)
        if kind == "op" and v in "<[":
            self.next()
            prog = self.sum()
            self.expect(">" if v == "<" else "]")
            phi = self._formula(self.unary(), pos)
            return diamond(prog, phi) if v == "<" else box(prog, phi)
        e = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] in "*?":
            _, op, pos = self.next()
            e = Star(e) if op == "*" else Dom(self._formula(e, pos))
        return e

    def _formula(self, e: Expr, pos: int) -> Expr:
        if not is_formula(e):
            raise ExprSyntaxError(f"{to_text(e)} is not a formula", pos)
        return e

    def atom(self) -> Expr:
        kind, v, pos = self.next()
        if kind == "num":
            if v not in ("0", "1"):
                raise ExprSyntaxError(f"unknown constant {v!r}", pos)
            return ONE if v == "1" else ZERO
        if kind == "id":
            if v in ("dom", "adom"):
                self.expect("(")
                body = self.sum()
                self.expect(")")
                return Dom(body) if v == "dom" else Anti(body)
            if v in _RESERVED:
                raise ExprSyntaxError(f"reserved word {v!r}", pos)
            if v in self.sig.props:
                return self.sig.prop(v)
            return self.sig.action(v)
        if kind == "op" and v == "(":
            e = self.sum()
            self.expect(")")
            return e
        raise ExprSyntaxError(f"unexpected {v or 'end of input'!r}", pos)


def parse(text: str, props: Iterable[str] = (), signature: Signature | None = None) -> Expr:
    """Parse ``text``; names in ``props`` (or in a ``props p q;`` prelude)
    are propositions, every other identifier is an action."""
    sig = signature if signature is not None else Signature()
    for p in props:
        sig.declare_prop(p)
    return _Parser(text, sig).parse()


def parse_many(texts: Iterable[str], props: Iterable[str] = ()) -> list[Expr]:
    sig = Signature(props)
    return [parse(t, signature=sig) for t in texts]
