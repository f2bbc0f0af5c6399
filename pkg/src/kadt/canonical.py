"""Canonical relational model over a closed parameter set, built by type
elimination.

Atoms are sign vectors over the parameter set, stored as ``int`` bitmasks
(bit ``i`` set means parameter ``i`` occurs positively). Sets of atoms are
also ``int`` bitmasks, over atom positions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

from .closure import ParameterSet, ends_in_formula, gamma_for, is_fl_closed, padded
from .syntax import (
    ONE, ZERO, Act, Anti, Dom, Expr, Prod, Prop, Star, Sum,
    actions as actions_of, is_formula, strip_domain, to_text,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_ATOMS = 1 << 16


class ClosureDeficiency(LookupError):
    """A parameter needed to evaluate a formula is missing from the set."""


class NotClosed(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, gamma_size: int, max_atoms: int):
        super().__init__(
            f"more than {max_atoms} candidate atoms over |Gamma| = {gamma_size}; "
            "raise --max-atoms to continue")
        self.gamma_size = gamma_size
        self.max_atoms = max_atoms


class InternalConsistencyError(AssertionError):
    """The elimination reached a fixpoint that violates the truth lemma.
    Always a bug."""


# --------------------------------------------------------------------------
# boolean skeletons of formulas over parameter indices
#
# ('v', i) | ('not', x) | ('and', x, y) | ('or', x, y) | True | False


def compile_formula(phi: Expr, gamma: ParameterSet):
    """Boolean skeleton of ``phi`` in terms of the signs of ``gamma``."""
    i = gamma.get(phi)
    if i is not None:
        return ("v", i)
    if phi == ONE:
        return True
    if phi == ZERO:
        return False
    if isinstance(phi, Prop):
        raise ClosureDeficiency(f"proposition {phi.name} not in the parameter set")
    if isinstance(phi, Sum) and is_formula(phi):
        return _or(compile_formula(phi.left, gamma), compile_formula(phi.right, gamma))
    if isinstance(phi, Prod) and is_formula(phi):
        return _and(compile_formula(phi.left, gamma), compile_formula(phi.right, gamma))
    if isinstance(phi, Anti):
        if is_formula(phi.body):
            return _not(compile_formula(phi.body, gamma))
        return _not(compile_domain(phi.body, gamma))
    if isinstance(phi, Dom):
        return compile_domain(phi.body, gamma)
    raise TypeError(f"{to_text(phi)} is not a formula")


def compile_domain(e: Expr, gamma: ParameterSet):
    """Skeleton of the domain test of ``e``."""
    body = strip_domain(e)
    for candidate in (Dom(body), padded(body)):
        i = gamma.get(candidate)
        if i is not None:
            return ("v", i)
    if is_formula(e):
        return compile_formula(e, gamma)
    if isinstance(body, Prod) and body.right == ONE:
        i = gamma.get(Dom(body.left))
        if i is not None:
            return ("v", i)
    raise ClosureDeficiency(f"no parameter for the domain of {to_text(e)}")


def _not(x):
    if isinstance(x, bool):
        return not x
    if x[0] == "not":
        return x[1]
    return ("not", x)


def _and(x, y):
    if x is False or y is False:
        return False
    if x is True:
        return y
    if y is True:
        return x
    return ("and", x, y)


def _or(x, y):
    if x is True or y is True:
        return True
    if x is False:
        return y
    if y is False:
        return x
    return ("or", x, y)


def skeleton_vars(x) -> set[int]:
    if isinstance(x, bool):
        return set()
    if x[0] == "v":
        return {x[1]}
    out = set()
    for sub in x[1:]:
        out |= skeleton_vars(sub)
    return out


def eval_skeleton(x, bits: int) -> bool:
    """Value of a skeleton at a single atom."""
    if isinstance(x, bool):
        return x
    tag = x[0]
    if tag == "v":
        return bool(bits >> x[1] & 1)
    if tag == "not":
        return not eval_skeleton(x[1], bits)
    if tag == "and":
        return eval_skeleton(x[1], bits) and eval_skeleton(x[2], bits)
    return eval_skeleton(x[1], bits) or eval_skeleton(x[2], bits)


def eval_skeleton_set(x, columns: list[int], full: int) -> int:
    """Value of a skeleton over many atoms at once. ``columns[i]`` is the set
    of atoms positive on parameter ``i``."""
    if isinstance(x, bool):
        return full if x else 0
    tag = x[0]
    if tag == "v":
        return columns[x[1]]
    if tag == "not":
        return full & ~eval_skeleton_set(x[1], columns, full)
    left = eval_skeleton_set(x[1], columns, full)
    right = eval_skeleton_set(x[2], columns, full)
    return left & right if tag == "and" else left | right


# --------------------------------------------------------------------------
# local coherence


def local_rule(param: Expr, gamma: ParameterSet):
    """The sign a parameter must take given the others, or ``None`` for
    atomic diamonds ``(a . phi)?`` whose sign is constrained only by steps."""
    if isinstance(param, Prop):
        return None
    e = param.body
    if e == ONE:
        return True
    if e == ZERO:
        return False
    if isinstance(e, Prop):
        return compile_formula(e, gamma)
    if isinstance(e, Star):
        return True
    if isinstance(e, Anti):
        return _not(compile_domain(e.body, gamma))
    if is_formula(e):
        return compile_formula(e, gamma)
    if not ends_in_formula(e):
        return ("v", gamma.index(Dom(Prod(e, ONE))))
    prog, phi = e.left, e.right
    if isinstance(prog, Act):
        return None
    if is_formula(prog):
        return _and(compile_formula(prog, gamma), compile_formula(phi, gamma))
    if isinstance(prog, Sum):
        return _or(("v", gamma.index(Dom(Prod(prog.left, phi)))),
                   ("v", gamma.index(Dom(Prod(prog.right, phi)))))
    if isinstance(prog, Prod):
        return ("v", gamma.index(Dom(Prod(prog.left, Anti(Anti(Prod(prog.right, phi)))))))
    if isinstance(prog, Star):
        return _or(compile_formula(phi, gamma),
                   ("v", gamma.index(Dom(Prod(prog.body, Anti(Anti(Prod(prog, phi))))))))
    raise TypeError(f"unexpected parameter {to_text(param)}")


def _search_order(rules: list) -> list[int]:
    n = len(rules)
    deps = [skeleton_vars(r) if r is not None else set() for r in rules]
    placed: set[int] = set()
    order: list[int] = []
    while len(order) < n:
        pick = None
        for k in range(n):
            if k not in placed and rules[k] is not None and deps[k] - {k} <= placed:
                pick = k
                break
        if pick is None:
            free = [k for k in range(n) if k not in placed and rules[k] is None]
            if free:
                pick = free[0]
            else:
                rest = [k for k in range(n) if k not in placed]
                pick = min(rest, key=lambda k: len(deps[k] - placed))
        placed.add(pick)
        order.append(pick)
    return order


def coherent_atoms(gamma: ParameterSet, max_atoms: int = DEFAULT_MAX_ATOMS) -> list[int]:
    """All locally coherent sign vectors, by backtracking search."""
    n = len(gamma)
    rules = [local_rule(p, gamma) for p in gamma]
    order = _search_order(rules)
    position = {k: t for t, k in enumerate(order)}
    determined = [False] * n
    checks: list[list[int]] = [[] for _ in range(n)]
    for t, k in enumerate(order):
        r = rules[k]
        if r is None:
            continue
        deps = skeleton_vars(r) - {k}
        if all(position[d] < t for d in deps):
            determined[t] = True
        else:
            last = max([position[d] for d in deps] + [t])
            checks[last].append(k)

    out: list[int] = []

    def consistent(k, bits):
        return eval_skeleton(rules[k], bits) == bool(bits >> k & 1)

    def go(t: int, bits: int) -> None:
        if t == n:
            out.append(bits)
            if len(out) > max_atoms:
                raise BudgetExceeded(n, max_atoms)
            return
        k = order[t]
        if determined[t]:
            values = (eval_skeleton(rules[k], bits),)
        else:
            values = (False, True)
        for v in values:
            b = bits | (1 << k) if v else bits
            if all(consistent(j, b) for j in checks[t]):
                go(t + 1, b)

    go(0, 0)
    out.sort()
    return out


# --------------------------------------------------------------------------
# atoms and the model


@dataclass(frozen=True)
class Atom:
    gamma: ParameterSet
    bits: int

    def holds(self, phi: Expr) -> bool:
        """Sign of ``phi`` (or of ``psi`` for ``phi = psi^-``) in this atom."""
        i = self.gamma.get(phi)
        if i is not None:
            return bool(self.bits >> i & 1)
        if isinstance(phi, Anti):
            j = self.gamma.get(phi.body)
            if j is not None:
                return not self.bits >> j & 1
        raise ClosureDeficiency(f"{to_text(phi)} is neither a member of the set nor a negated member")

    def signs(self) -> list[tuple[Expr, bool]]:
        return [(p, bool(self.bits >> i & 1)) for i, p in enumerate(self.gamma)]

    def __str__(self):
        return "{" + " ".join(("" if s else "!") + to_text(p) for p, s in self.signs()) + "}"

    def as_expr(self) -> Expr:
        from .syntax import prod_of
        return prod_of(p if s else Anti(p) for p, s in self.signs())


def entails(atom: Atom, phi: Expr) -> bool:
    """Truth value of the formula ``phi`` at ``atom``."""
    return eval_skeleton(compile_formula(phi, atom.gamma), atom.bits)


@dataclass(frozen=True)
class CanonicalModel:
    gamma: ParameterSet
    masks: tuple[int, ...]                 # surviving atoms, ascending
    actions: tuple[str, ...]
    succ: dict = field(repr=False)         # action -> tuple of successor bitsets
    trace: tuple[str, ...] = field(default=(), repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.masks)

    @property
    def full(self) -> int:
        return (1 << len(self.masks)) - 1

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(Atom(self.gamma, m) for m in self.masks)

    def atom(self, i: int) -> Atom:
        return Atom(self.gamma, self.masks[i])

    def position(self, atom: Atom | int) -> int | None:
        bits = atom.bits if isinstance(atom, Atom) else atom
        return self._pos.get(bits)

    @property
    def _pos(self) -> dict[int, int]:
        cache = self.__dict__.get("_pos_cache")
        if cache is None:
            cache = {m: i for i, m in enumerate(self.masks)}
            object.__setattr__(self, "_pos_cache", cache)
        return cache

    def successors(self, action: str, i: int) -> list[int]:
        row = self.succ[action][i] if action in self.succ else 0
        return [j for j in range(len(self.masks)) if row >> j & 1]

    def steps(self, action: str) -> set[tuple[Atom, Atom]]:
        return {(self.atom(i), self.atom(j))
                for i in range(self.size) for j in self.successors(action, i)}

    def step_pairs(self, action: str) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.size) for j in self.successors(action, i)]

    def columns(self) -> list[int]:
        """Per parameter, the set of surviving atoms positive on it."""
        cols = [0] * len(self.gamma)
        for pos, m in enumerate(self.masks):
            for k in range(len(self.gamma)):
                if m >> k & 1:
                    cols[k] |= 1 << pos
        return cols

    def formula_set(self, phi: Expr) -> int:
        """Atoms (as a position bitset) where ``phi`` is entailed."""
        return eval_skeleton_set(compile_formula(phi, self.gamma), self.columns(), self.full)

    def to_relational(self):
        from .relational import RelationalModel
        props = sorted(p.name for p in self.gamma if isinstance(p, Prop))
        rel = {a: self.step_pairs(a) for a in self.actions}
        sat = {p: [i for i, m in enumerate(self.masks)
                   if m >> self.gamma.index(Prop(p)) & 1] for p in props}
        return RelationalModel.build(len(self.masks), rel, sat)


def is_consistent(atom: Atom, model: CanonicalModel) -> bool:
    if atom.gamma != model.gamma:
        raise ValueError("atom and model are over different parameter sets")
    return model.position(atom) is not None


# --------------------------------------------------------------------------
# programs over sets of atoms


class _Graph:
    """Candidate atoms with step relation and sign columns, all as bitsets."""

    def __init__(self, gamma, masks, succ, alive):
        self.gamma = gamma
        self.masks = masks
        self.succ = succ
        self.alive = alive
        self.n = len(masks)
        self.cols = [0] * len(gamma)
        for pos, m in enumerate(masks):
            for k in range(len(gamma)):
                if m >> k & 1:
                    self.cols[k] |= 1 << pos

    def formula(self, phi: Expr) -> int:
        return eval_skeleton_set(compile_formula(phi, self.gamma), self.cols, self.alive)

    def pre(self, e: Expr, target: int) -> int:
        """Atoms with an ``e``-path into ``target``; tests read signs."""
        target &= self.alive
        if is_formula(e):
            return target & self.formula(e)
        if isinstance(e, Act):
            rows = self.succ.get(e.name)
            out = 0
            for i in _members(self.alive):
                if rows is None or rows[i] & target:
                    out |= 1 << i
            return out
        if isinstance(e, Sum):
            return self.pre(e.left, target) | self.pre(e.right, target)
        if isinstance(e, Prod):
            return self.pre(e.left, self.pre(e.right, target))
        if isinstance(e, Star):
            reach = target
            while True:
                nxt = reach | self.pre(e.body, reach)
                if nxt == reach:
                    return reach
                reach = nxt
        raise TypeError(f"unexpected program {to_text(e)}")

    def truth(self, phi: Expr) -> int:
        """Atoms where ``phi`` holds, evaluated structurally; only
        propositions are read from signs."""
        if isinstance(phi, Prop):
            return self.cols[self.gamma.index(phi)] & self.alive
        if phi == ONE:
            return self.alive
        if phi == ZERO:
            return 0
        if isinstance(phi, Sum):
            return self.truth(phi.left) | self.truth(phi.right)
        if isinstance(phi, Prod):
            return self.truth(phi.left) & self.truth(phi.right)
        if isinstance(phi, Anti):
            return self.alive & ~self.semantic_pre(phi.body, self.alive)
        if isinstance(phi, Dom):
            return self.semantic_pre(phi.body, self.alive)
        raise TypeError(phi)

    def semantic_pre(self, e: Expr, target: int) -> int:
        if is_formula(e):
            return target & self.truth(e)
        if isinstance(e, Act):
            return self.pre(e, target)
        if isinstance(e, Sum):
            return self.semantic_pre(e.left, target) | self.semantic_pre(e.right, target)
        if isinstance(e, Prod):
            return self.semantic_pre(e.left, self.semantic_pre(e.right, target))
        if isinstance(e, Star):
            reach = target & self.alive
            while True:
                nxt = reach | self.semantic_pre(e.body, reach)
                if nxt == reach:
                    return reach
                reach = nxt
        raise TypeError(e)


def _members(bits: int):
    i = 0
    while bits:
        if bits & 1:
            yield i
        bits >>= 1
        i += 1


def _box_compatible_steps(gamma: ParameterSet, masks: list[int], action: str) -> list[int]:
    """Successor bitsets for ``action``: ``G -> H`` unless some
    ``(a . phi)?`` is negative at G while ``phi`` holds at H."""
    diamonds = []
    for k, p in enumerate(gamma):
        if (isinstance(p, Dom) and ends_in_formula(p.body)
                and isinstance(p.body.left, Act) and p.body.left.name == action):
            diamonds.append((k, compile_formula(p.body.right, gamma)))
    n = len(masks)
    groups: dict[int, int] = {}
    for j, m in enumerate(masks):
        need = 0
        for d, (_, phi) in enumerate(diamonds):
            if eval_skeleton(phi, m):
                need |= 1 << d
        groups[need] = groups.get(need, 0) | (1 << j)
    rows = []
    for m in masks:
        have = 0
        for d, (k, _) in enumerate(diamonds):
            if m >> k & 1:
                have |= 1 << d
        row = 0
        for need, targets in groups.items():
            if need & ~have == 0:
                row |= targets
        rows.append(row)
    assert len(rows) == n
    return rows


def build_canonical(gamma: ParameterSet, actions: Iterable[str] = (),
                    max_atoms: int = DEFAULT_MAX_ATOMS, check_closed: bool = True) -> CanonicalModel:
    """Type elimination: coherent atoms, box-compatible steps, then removal
    of atoms with unfulfilled diamonds until nothing changes."""
    if check_closed and not is_fl_closed(gamma):
        raise NotClosed("parameter set is not Fischer--Ladner closed")
    acts = tuple(sorted(set(actions) | gamma.actions()))
    masks = coherent_atoms(gamma, max_atoms)
    trace = [f"{len(masks)} coherent atoms of {1 << len(gamma)} over {len(gamma)} parameters"]
    succ = {a: _box_compatible_steps(gamma, masks, a) for a in acts}
    alive = (1 << len(masks)) - 1
    graph = _Graph(gamma, masks, succ, alive)
    programs = [(k, p.body) for k, p in enumerate(gamma)
                if isinstance(p, Dom) and not is_formula(p.body)]
    rounds = 0
    while True:
        rounds += 1
        bad = 0
        for k, e in programs:
            bad |= graph.cols[k] & graph.alive & ~graph.pre(e, graph.alive)
        if not bad:
            break
        graph.alive &= ~bad
        trace.append(f"round {rounds}: eliminated {bin(bad).count('1')} atoms")
    survivors = [i for i in range(len(masks)) if graph.alive >> i & 1]
    trace.append(f"{len(survivors)} atoms survive after {rounds} rounds")

    # sanity: no negative diamond is semantically fulfilled
    for k, e in programs:
        wrong = graph.pre(e, graph.alive) & graph.alive & ~graph.cols[k]
        if wrong:
            raise InternalConsistencyError(
                f"negative parameter {to_text(gamma[k])} is fulfilled at a surviving atom")
    # truth lemma: every sign agrees with structural evaluation
    for k, p in enumerate(gamma):
        if graph.truth(p) != graph.cols[k] & graph.alive:
            raise InternalConsistencyError(f"signs of {to_text(p)} disagree with its evaluation")

    remap = {old: new for new, old in enumerate(survivors)}
    new_succ = {}
    for a in acts:
        rows = []
        for old in survivors:
            row = 0
            for j in _members(succ[a][old] & graph.alive):
                row |= 1 << remap[j]
            rows.append(row)
        new_succ[a] = tuple(rows)
    log.debug("; ".join(trace))
    return CanonicalModel(gamma, tuple(masks[i] for i in survivors), acts, new_succ, tuple(trace))


def canonical_for(exprs: Iterable[Expr], max_atoms: int = DEFAULT_MAX_ATOMS) -> CanonicalModel:
    exprs = list(exprs)
    gamma = gamma_for(exprs)
    acts = set()
    for e in exprs:
        acts |= actions_of(e)
    return build_canonical(gamma, acts, max_atoms=max_atoms, check_closed=False)


def sat(phi: Expr, max_atoms: int = DEFAULT_MAX_ATOMS):
    """Satisfiability of a formula. Returns ``(True, model, state)`` with the
    canonical model exported as a relational model, or ``(False, None, None)``."""
    if not is_formula(phi):
        raise TypeError(f"{to_text(phi)} is not a formula")
    model = canonical_for([phi], max_atoms)
    where = model.formula_set(phi)
    if not where:
        return False, None, None
    state = next(_members(where))
    return True, model.to_relational(), state
