"""Guarded strings, guarded automata and the two guarded-language
interpretations of expressions.

Automaton letters are atom bitmasks (``int``) and action names (``str``).
States are typed: an atom-expecting state only has atom transitions and an
action-expecting state only action transitions. Initial states expect atoms,
accepting states expect actions, so every accepted word is a guarded string.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .canonical import (
    Atom, CanonicalModel, ClosureDeficiency, compile_formula, eval_skeleton,
)
from .closure import ParameterSet
from .syntax import (
    ONE, ZERO, Act, Anti, Dom, Expr, Prod, Prop, Star, Sum,
    is_formula, prod_of, question, sum_of, to_text,
)

ATOM, ACTION = 0, 1


# --------------------------------------------------------------------------
# guarded strings


@dataclass(frozen=True)
class GuardedString:
    items: tuple  # Atom, str, Atom, str, ..., Atom

    def __post_init__(self):
        if len(self.items) % 2 == 0:
            raise ValueError("a guarded string has an odd number of letters")
        for i, x in enumerate(self.items):
            if (i % 2 == 0) != isinstance(x, Atom):
                raise ValueError("atoms and actions must alternate, starting with an atom")
        gammas = {g.gamma for g in self.items[::2]}
        if len(gammas) > 1:
            raise ValueError("atoms of a guarded string share one parameter set")

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return self.items[::2]

    @property
    def actions(self) -> tuple[str, ...]:
        return self.items[1::2]

    @property
    def first(self) -> Atom:
        return self.items[0]

    @property
    def last(self) -> Atom:
        return self.items[-1]

    def __len__(self):
        return len(self.atoms)

    def __str__(self):
        return " ".join(str(x) for x in self.items)

    def as_expr(self) -> Expr:
        return prod_of(x.as_expr() if isinstance(x, Atom) else Act(x) for x in self.items)

    @staticmethod
    def of(gamma: ParameterSet, letters: Sequence) -> "GuardedString":
        """From a list of atom bitmasks and action names."""
        return GuardedString(tuple(Atom(gamma, x) if isinstance(x, int) else x for x in letters))


def fusion(w: GuardedString, u: GuardedString) -> GuardedString | None:
    if w.last != u.first:
        return None
    return GuardedString(w.items + u.items[1:])


# --------------------------------------------------------------------------
# automata


@dataclass(frozen=True)
class GuardedAutomaton:
    gamma: ParameterSet
    kinds: tuple[int, ...]
    delta: tuple[tuple[tuple[object, int], ...], ...]   # per state: (letter, target)
    initial: frozenset
    accepting: frozenset

    @property
    def size(self) -> int:
        return len(self.kinds)

    def is_empty(self) -> bool:
        return not self.initial or not self.accepting

    def first_atoms(self) -> set[int]:
        """Atoms that begin some accepted word (automaton is trimmed)."""
        return {x for s in self.initial for x, _ in self.delta[s]}

    def accepts(self, w: GuardedString) -> bool:
        current = set(self.initial)
        for x in w.items:
            letter = x.bits if isinstance(x, Atom) else x
            current = {t for s in current for y, t in self.delta[s] if y == letter}
            if not current:
                return False
        return bool(current & self.accepting)

    def words(self, max_atoms: int) -> set[GuardedString]:
        """Accepted words with at most ``max_atoms`` atoms (for testing)."""
        out = set()
        todo = [(s, ()) for s in self.initial]
        while todo:
            s, word = todo.pop()
            if s in self.accepting:
                out.add(GuardedString.of(self.gamma, word))
            if (len(word) + 1) // 2 >= max_atoms and self.kinds[s] == ACTION:
                continue
            for x, t in self.delta[s]:
                todo.append((t, word + (x,)))
        return out


class _Builder:
    """Mutable automaton under construction."""

    def __init__(self, gamma):
        self.gamma = gamma
        self.kinds: list[int] = []
        self.delta: list[set] = []
        self.initial: set[int] = set()
        self.accepting: set[int] = set()

    def state(self, kind: int) -> int:
        self.kinds.append(kind)
        self.delta.append(set())
        return len(self.kinds) - 1

    def edge(self, s: int, letter, t: int) -> None:
        is_atom = isinstance(letter, int)
        if self.kinds[s] != (ATOM if is_atom else ACTION) or self.kinds[t] != (ACTION if is_atom else ATOM):
            raise AssertionError("ill-typed guarded automaton transition")
        self.delta[s].add((letter, t))

    def embed(self, A: GuardedAutomaton) -> int:
        off = len(self.kinds)
        for k in A.kinds:
            self.state(k)
        for s, edges in enumerate(A.delta):
            for x, t in edges:
                self.delta[off + s].add((x, off + t))
        return off

    def freeze(self) -> GuardedAutomaton:
        return _trim(self)


def _trim(b: _Builder) -> GuardedAutomaton:
    n = len(b.kinds)
    fwd = set(b.initial)
    stack = list(fwd)
    while stack:
        s = stack.pop()
        for _, t in b.delta[s]:
            if t not in fwd:
                fwd.add(t)
                stack.append(t)
    back_edges: list[list[int]] = [[] for _ in range(n)]
    for s in range(n):
        for _, t in b.delta[s]:
            back_edges[t].append(s)
    bwd = set(b.accepting)
    stack = list(bwd)
    while stack:
        t = stack.pop()
        for s in back_edges[t]:
            if s not in bwd:
                bwd.add(s)
                stack.append(s)
    keep = sorted(fwd & bwd)
    renum = {s: i for i, s in enumerate(keep)}
    delta = tuple(tuple(sorted(((x, renum[t]) for x, t in b.delta[s] if t in renum), key=_edge_key))
                  for s in keep)
    return GuardedAutomaton(
        b.gamma, tuple(b.kinds[s] for s in keep), delta,
        frozenset(renum[s] for s in b.initial if s in renum),
        frozenset(renum[s] for s in b.accepting if s in renum))


def _edge_key(edge):
    x, t = edge
    return (0, x, "", t) if isinstance(x, int) else (1, 0, x, t)


def atoms_automaton(gamma: ParameterSet, atoms: Iterable[int]) -> GuardedAutomaton:
    b = _Builder(gamma)
    i, f = b.state(ATOM), b.state(ACTION)
    for g in atoms:
        b.edge(i, g, f)
    b.initial.add(i)
    b.accepting.add(f)
    return b.freeze()


def action_automaton(gamma: ParameterSet, action: str, steps: Iterable[tuple[int, int]]) -> GuardedAutomaton:
    """Words ``G a H`` for the given atom pairs."""
    b = _Builder(gamma)
    i, f = b.state(ATOM), b.state(ACTION)
    b.initial.add(i)
    b.accepting.add(f)
    mid: dict[int, int] = {}
    end: dict[int, int] = {}
    for g, h in steps:
        if g not in mid:
            mid[g] = b.state(ACTION)
            b.edge(i, g, mid[g])
        if h not in end:
            end[h] = b.state(ATOM)
            b.edge(end[h], h, f)
        b.edge(mid[g], action, end[h])
    return b.freeze()


def product_automaton(gamma: ParameterSet, action: str, sources: Iterable[int],
                      targets: Iterable[int]) -> GuardedAutomaton:
    """Words ``G a H`` for all ``G`` in ``sources`` and ``H`` in ``targets``."""
    b = _Builder(gamma)
    i, m, n, f = b.state(ATOM), b.state(ACTION), b.state(ATOM), b.state(ACTION)
    for g in sources:
        b.edge(i, g, m)
    b.edge(m, action, n)
    for h in targets:
        b.edge(n, h, f)
    b.initial.add(i)
    b.accepting.add(f)
    return b.freeze()


def union(A: GuardedAutomaton, B: GuardedAutomaton) -> GuardedAutomaton:
    b = _Builder(A.gamma)
    oa, ob = b.embed(A), b.embed(B)
    b.initial |= {oa + s for s in A.initial} | {ob + s for s in B.initial}
    b.accepting |= {oa + s for s in A.accepting} | {ob + s for s in B.accepting}
    return b.freeze()


def _splice(b: _Builder, src_off: int, A: GuardedAutomaton, dst_off: int, B: GuardedAutomaton) -> None:
    """Add fusion shortcuts: an atom read by ``A`` into acceptance may instead
    be read as the first atom of ``B``."""
    entries: dict[int, list[int]] = {}
    for i in B.initial:
        for x, r in B.delta[i]:
            entries.setdefault(x, []).append(dst_off + r)
    for p, edges in enumerate(A.delta):
        for x, q in edges:
            if q in A.accepting:
                for r in entries.get(x, ()):
                    b.delta[src_off + p].add((x, r))


def fuse(A: GuardedAutomaton, B: GuardedAutomaton) -> GuardedAutomaton:
    """Fusion product of the two languages."""
    b = _Builder(A.gamma)
    oa, ob = b.embed(A), b.embed(B)
    _splice(b, oa, A, ob, B)
    b.initial |= {oa + s for s in A.initial}
    b.accepting |= {ob + s for s in B.accepting}
    return b.freeze()


def fusion_star(A: GuardedAutomaton, base: Iterable[int]) -> GuardedAutomaton:
    """``base`` atoms together with all fusion powers of ``A``."""
    b = _Builder(A.gamma)
    oa = b.embed(A)
    _splice(b, oa, A, oa, A)
    b.initial |= {oa + s for s in A.initial}
    b.accepting |= {oa + s for s in A.accepting}
    i, f = b.state(ATOM), b.state(ACTION)
    for g in base:
        b.edge(i, g, f)
    b.initial.add(i)
    b.accepting.add(f)
    return b.freeze()


# --------------------------------------------------------------------------
# interpretations


def canonical_interpret(e: Expr, C: CanonicalModel, _memo: dict | None = None) -> GuardedAutomaton:
    """Automaton for the canonical guarded language of ``e`` over ``C``."""
    memo = {} if _memo is None else _memo
    hit = memo.get(e)
    if hit is not None:
        return hit
    gamma = C.gamma
    consistent = C.masks
    if e == ZERO:
        out = atoms_automaton(gamma, ())
    elif e == ONE:
        out = atoms_automaton(gamma, consistent)
    elif isinstance(e, Prop):
        k = gamma.get(e)
        if k is None:
            raise ClosureDeficiency(f"proposition {e.name} not in the parameter set")
        out = atoms_automaton(gamma, [m for m in consistent if m >> k & 1])
    elif isinstance(e, Act):
        steps = [(C.masks[i], C.masks[j]) for i, j in C.step_pairs(e.name)] if e.name in C.succ else []
        out = action_automaton(gamma, e.name, steps)
    elif isinstance(e, Sum):
        out = union(canonical_interpret(e.left, C, memo), canonical_interpret(e.right, C, memo))
    elif isinstance(e, Prod):
        out = fuse(canonical_interpret(e.left, C, memo), canonical_interpret(e.right, C, memo))
    elif isinstance(e, Star):
        out = fusion_star(canonical_interpret(e.body, C, memo), consistent)
    elif isinstance(e, Dom):
        out = atoms_automaton(gamma, sorted(canonical_interpret(e.body, C, memo).first_atoms()))
    elif isinstance(e, Anti):
        firsts = canonical_interpret(e.body, C, memo).first_atoms()
        out = atoms_automaton(gamma, [m for m in consistent if m not in firsts])
    else:
        raise TypeError(f"not an expression: {e!r}")
    memo[e] = out
    return out


def all_atoms(gamma: ParameterSet) -> list[int]:
    return list(range(1 << len(gamma)))


def _is_letter_test(e: Expr, gamma: ParameterSet) -> bool:
    return e in gamma or (isinstance(e, Anti) and e.body in gamma)


def test_atoms(e: Expr, gamma: ParameterSet, universe: Sequence[int]) -> list[int] | None:
    """Atoms of ``universe`` in the standard interpretation of a Boolean
    combination of signed parameters, or ``None`` if ``e`` is not one."""
    if e == ZERO:
        return []
    if e == ONE:
        return list(universe)
    if e in gamma:
        k = gamma.index(e)
        return [m for m in universe if m >> k & 1]
    if isinstance(e, Anti) and e.body in gamma:
        k = gamma.index(e.body)
        return [m for m in universe if not m >> k & 1]
    if isinstance(e, (Sum, Prod)):
        left = test_atoms(e.left, gamma, universe)
        if left is None:
            return None
        right = test_atoms(e.right, gamma, universe)
        if right is None:
            return None
        if isinstance(e, Sum):
            keep = set(left) | set(right)
        else:
            keep = set(left) & set(right)
        return [m for m in universe if m in keep]
    return None


class NotKatOverGamma(ValueError):
    pass


def standard_interpret(e: Expr, gamma: ParameterSet, atoms: Sequence[int] | None = None) -> GuardedAutomaton:
    """Automaton for the standard guarded language of a KAT expression over
    the signed parameters of ``gamma``. ``atoms`` defaults to all atoms."""
    universe = list(atoms) if atoms is not None else all_atoms(gamma)
    memo: dict = {}

    def go(x: Expr) -> GuardedAutomaton:
        if x in memo:
            return memo[x]
        tests = test_atoms(x, gamma, universe)
        if tests is not None:
            out = atoms_automaton(gamma, tests)
        elif isinstance(x, Act):
            out = product_automaton(gamma, x.name, universe, universe)
        elif isinstance(x, Sum):
            out = union(go(x.left), go(x.right))
        elif isinstance(x, Prod):
            out = fuse(go(x.left), go(x.right))
        elif isinstance(x, Star):
            out = fusion_star(go(x.body), universe)
        else:
            raise NotKatOverGamma(f"{to_text(x)} is not built from actions and signed parameters")
        memo[x] = out
        return out

    return go(e)


# --------------------------------------------------------------------------
# KAT normal form and hat


def _skeleton_expr(x, gamma: ParameterSet, positive: bool = True) -> Expr:
    """Negation normal form of a Boolean skeleton as signed parameters."""
    if isinstance(x, bool):
        return ONE if x == positive else ZERO
    tag = x[0]
    if tag == "v":
        return gamma[x[1]] if positive else Anti(gamma[x[1]])
    if tag == "not":
        return _skeleton_expr(x[1], gamma, not positive)
    left = _skeleton_expr(x[1], gamma, positive)
    right = _skeleton_expr(x[2], gamma, positive)
    if (tag == "and") == positive:
        return Prod(left, right)
    return Sum(left, right)


def _kat_formula(phi: Expr, gamma: ParameterSet) -> Expr:
    if phi in gamma or phi in (ONE, ZERO):
        return phi
    if isinstance(phi, Dom):
        q = question(phi)
        if q in gamma:
            return q
    if isinstance(phi, Anti):
        inner = _kat_formula(Dom(phi.body), gamma)
        if inner in gamma:
            return Anti(inner)
    if isinstance(phi, (Sum, Prod)):
        return type(phi)(_kat_formula(phi.left, gamma), _kat_formula(phi.right, gamma))
    return _skeleton_expr(compile_formula(phi, gamma), gamma)


def normalize_to_kat(e: Expr, gamma: ParameterSet) -> Expr:
    """Replace every maximal formula by signed parameters of ``gamma``."""
    if is_formula(e):
        return _kat_formula(e, gamma)
    if isinstance(e, Act):
        return e
    if isinstance(e, (Sum, Prod)):
        return type(e)(normalize_to_kat(e.left, gamma), normalize_to_kat(e.right, gamma))
    if isinstance(e, Star):
        return Star(normalize_to_kat(e.body, gamma))
    raise NotKatOverGamma(f"cannot normalize {to_text(e)}")


def hat(e: Expr, C: CanonicalModel) -> Expr:
    """Replace letters by explicit sums of consistent atoms and steps."""
    gamma = C.gamma
    if e == ZERO:
        return ZERO
    if e == ONE:
        return sum_of(a.as_expr() for a in C.atoms)
    if _is_letter_test(e, gamma):
        keep = test_atoms(e, gamma, C.masks)
        return sum_of(Atom(gamma, m).as_expr() for m in keep)
    if isinstance(e, Act):
        if e.name not in C.succ:
            return ZERO
        return sum_of(prod_of([C.atom(i).as_expr(), Act(e.name), C.atom(j).as_expr()])
                      for i, j in C.step_pairs(e.name))
    if isinstance(e, Sum):
        return Sum(hat(e.left, C), hat(e.right, C))
    if isinstance(e, Prod):
        return Prod(hat(e.left, C), hat(e.right, C))
    if isinstance(e, Star):
        return Star(hat(e.body, C))
    raise NotKatOverGamma(f"{to_text(e)} is not built from actions and signed parameters")


# --------------------------------------------------------------------------
# language comparison


@dataclass(frozen=True)
class Equal:
    pass


@dataclass(frozen=True)
class Witness:
    word: GuardedString


def _letter_key(x):
    return (0, x, "") if isinstance(x, int) else (1, 0, x)


def language_equal(A: GuardedAutomaton, B: GuardedAutomaton):
    """``Equal()`` or the shortest, then least, word accepted by exactly one
    of the automata. Atoms are ordered by bitmask, actions by name."""
    if A.gamma != B.gamma:
        raise ValueError("automata over different parameter sets")
    start = (frozenset(A.initial), frozenset(B.initial))
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (sa, sb), word = queue.popleft()
        if bool(sa & A.accepting) != bool(sb & B.accepting):
            return Witness(GuardedString.of(A.gamma, word))
        moves: dict = {}
        for s in sa:
            for x, t in A.delta[s]:
                moves.setdefault(x, (set(), set()))[0].add(t)
        for s in sb:
            for x, t in B.delta[s]:
                moves.setdefault(x, (set(), set()))[1].add(t)
        for x in sorted(moves, key=_letter_key):
            nxt = (frozenset(moves[x][0]), frozenset(moves[x][1]))
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, word + (x,)))
    return Equal()


# --------------------------------------------------------------------------
# membership by interval matching


def member(w: GuardedString, e: Expr, C: CanonicalModel) -> bool:
    """Whether ``w`` lies in the canonical language of ``e``. Decided on the
    string itself; domain tests go through the exported relational model."""
    from .relational import relation_rows

    pos = [C.position(g) for g in w.atoms]
    if any(p is None for p in pos):
        return False
    acts = w.actions
    n = len(pos)
    model = C.to_relational()
    rel_memo: dict = {}
    memo: dict = {}

    def has_domain(f: Expr, i: int) -> bool:
        return bool(relation_rows(f, model, rel_memo)[pos[i]])

    def m(x: Expr, i: int, j: int) -> bool:
        key = (x, i, j)
        if key in memo:
            return memo[key]
        memo[key] = False           # guards star recursion
        if x == ZERO:
            r = False
        elif x == ONE:
            r = i == j
        elif isinstance(x, Prop):
            r = i == j and bool(C.masks[pos[i]] >> C.gamma.index(x) & 1)
        elif isinstance(x, Act):
            r = (j == i + 1 and acts[i] == x.name
                 and x.name in C.succ and bool(C.succ[x.name][pos[i]] >> pos[j] & 1))
        elif isinstance(x, Dom):
            r = i == j and has_domain(x.body, i)
        elif isinstance(x, Anti):
            r = i == j and not has_domain(x.body, i)
        elif isinstance(x, Sum):
            r = m(x.left, i, j) or m(x.right, i, j)
        elif isinstance(x, Prod):
            r = any(m(x.left, i, k) and m(x.right, k, j) for k in range(i, j + 1))
        elif isinstance(x, Star):
            r = i == j or any(m(x.body, i, k) and m(x, k, j) for k in range(i + 1, j + 1))
        else:
            raise TypeError(x)
        memo[key] = r
        return r

    return m(e, 0, n - 1)


def entails_word(w: GuardedString, phi: Expr) -> bool:
    """Truth of a formula at the last atom of ``w``."""
    return eval_skeleton(compile_formula(phi, w.last.gamma), w.last.bits)
