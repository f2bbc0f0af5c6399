"""Finite relational models: evaluation, satisfaction, unravelings,
bisimulation and brute-force oracles.

Relations are handled internally as tuples of successor bitsets, one
``int`` per state.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .syntax import (
    ONE, ZERO, Act, Anti, Dom, Expr, Prod, Prop, Star, Sum,
    actions as actions_of, is_formula, propositions, to_text,
)


class UnknownSymbol(KeyError):
    pass


class AlphabetMismatch(ValueError):
    pass


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class RelationalModel:
    names: tuple[str, ...]
    rel: Mapping[str, frozenset]      # action -> frozenset of (x, y)
    sat: Mapping[str, frozenset]      # proposition -> frozenset of x

    @staticmethod
    def build(states: int | Sequence[str], rel: Mapping[str, Iterable] = (),
              sat: Mapping[str, Iterable] = ()) -> "RelationalModel":
        names = tuple(str(i) for i in range(states)) if isinstance(states, int) else tuple(states)
        n = len(names)
        rel = dict(rel)
        sat = dict(sat)
        r = {a: frozenset((int(x), int(y)) for x, y in pairs) for a, pairs in rel.items()}
        s = {p: frozenset(int(x) for x in xs) for p, xs in sat.items()}
        for a, pairs in r.items():
            if any(not (0 <= x < n and 0 <= y < n) for x, y in pairs):
                raise ValueError(f"pair of action {a} outside the state set")
        for p, xs in s.items():
            if any(not 0 <= x < n for x in xs):
                raise ValueError(f"state of proposition {p} outside the state set")
        return RelationalModel(names, r, s)

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def states(self) -> range:
        return range(len(self.names))

    @property
    def actions(self) -> tuple[str, ...]:
        return tuple(sorted(self.rel))

    @property
    def props(self) -> tuple[str, ...]:
        return tuple(sorted(self.sat))

    def rows(self, action: str) -> tuple[int, ...]:
        cache = self.__dict__.setdefault("_rows", {})
        if action not in cache:
            if action not in self.rel:
                raise UnknownSymbol(f"action {action} not named in the model")
            rows = [0] * self.size
            for x, y in self.rel[action]:
                rows[x] |= 1 << y
            cache[action] = tuple(rows)
        return cache[action]

    def prop_set(self, p: str) -> int:
        if p not in self.sat:
            raise UnknownSymbol(f"proposition {p} not named in the model")
        out = 0
        for x in self.sat[p]:
            out |= 1 << x
        return out

    # ---- serialization

    def to_dict(self) -> dict:
        plain = all(name == str(i) for i, name in enumerate(self.names))
        return {
            "states": self.size if plain else list(self.names),
            "rel": {a: sorted([x, y] for x, y in self.rel[a]) for a in sorted(self.rel)},
            "sat": {p: sorted(self.sat[p]) for p in sorted(self.sat)},
        }

    def dumps(self) -> str:
        """One field per line, values compact; byte-stable for a given model."""
        d = self.to_dict()
        fields = [f'  "{k}": {json.dumps(d[k], sort_keys=True)}' for k in ("states", "rel", "sat")]
        return "{\n" + ",\n".join(fields) + "\n}"

    @staticmethod
    def from_dict(d: Mapping) -> "RelationalModel":
        states = d["states"]
        if isinstance(states, list):
            names = [str(s) for s in states]
            index = {s: i for i, s in enumerate(names)}
        else:
            names = int(states)
            index = {str(i): i for i in range(names)}

        def ref(x):
            return index[str(x)] if str(x) in index else int(x)

        rel = {a: [(ref(x), ref(y)) for x, y in pairs] for a, pairs in d.get("rel", {}).items()}
        sat = {p: [ref(x) for x in xs] for p, xs in d.get("sat", {}).items()}
        return RelationalModel.build(names, rel, sat)

    @staticmethod
    def loads(text: str) -> "RelationalModel":
        return RelationalModel.from_dict(json.loads(text))


# --------------------------------------------------------------------------
# evaluation


def _compose(left: Sequence[int], right: Sequence[int]) -> tuple[int, ...]:
    out = []
    for row in left:
        acc = 0
        y = 0
        while row:
            if row & 1:
                acc |= right[y]
            row >>= 1
            y += 1
        out.append(acc)
    return tuple(out)


def _identity_on(bits: int, n: int) -> tuple[int, ...]:
    return tuple((1 << x) if bits >> x & 1 else 0 for x in range(n))


def relation_rows(e: Expr, M: RelationalModel, memo: dict | None = None) -> tuple[int, ...]:
    """Denotation of ``e`` in ``M`` as successor bitsets."""
    if memo is None:
        memo = {}
    hit = memo.get(e)
    if hit is not None:
        return hit
    n = M.size
    if isinstance(e, Act):
        out = M.rows(e.name)
    elif isinstance(e, Prop):
        out = _identity_on(M.prop_set(e.name), n)
    elif e == ZERO:
        out = (0,) * n
    elif e == ONE:
        out = tuple(1 << x for x in range(n))
    elif isinstance(e, Sum):
        l, r = relation_rows(e.left, M, memo), relation_rows(e.right, M, memo)
        out = tuple(a | b for a, b in zip(l, r))
    elif isinstance(e, Prod):
        out = _compose(relation_rows(e.left, M, memo), relation_rows(e.right, M, memo))
    elif isinstance(e, Star):
        body = relation_rows(e.body, M, memo)
        acc = tuple(1 << x for x in range(n))
        while True:
            nxt = tuple(a | b for a, b in zip(acc, _compose(acc, body)))
            if nxt == acc:
                break
            acc = nxt
        out = acc
    elif isinstance(e, Anti):
        rows = relation_rows(e.body, M, memo)
        out = tuple(0 if rows[x] else 1 << x for x in range(n))
    elif isinstance(e, Dom):
        rows = relation_rows(e.body, M, memo)
        out = tuple(1 << x if rows[x] else 0 for x in range(n))
    else:
        raise TypeError(f"not an expression: {e!r}")
    memo[e] = out
    return out


def rows_to_pairs(rows: Sequence[int]) -> frozenset:
    return frozenset((x, y) for x, row in enumerate(rows) for y in range(row.bit_length()) if row >> y & 1)


def evaluate(e: Expr, M: RelationalModel) -> frozenset:
    """The set of state pairs denoted by ``e`` in ``M``."""
    return rows_to_pairs(relation_rows(e, M))


def truth_set(phi: Expr, M: RelationalModel) -> int:
    """States satisfying a formula, as a bitset."""
    if not is_formula(phi):
        raise TypeError(f"{to_text(phi)} is not a formula")
    rows = relation_rows(phi, M)
    return sum(1 << x for x in range(M.size) if rows[x] >> x & 1)


def satisfies(M: RelationalModel, x: int, phi: Expr) -> bool:
    return bool(truth_set(phi, M) >> x & 1)


def reflexive_transitive_closure(pairs: Iterable[tuple[int, int]], n: int) -> frozenset:
    """Warshall closure plus the diagonal; kept independent of ``evaluate``."""
    reach = [[False] * n for _ in range(n)]
    for x in range(n):
        reach[x][x] = True
    for x, y in pairs:
        reach[x][y] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return frozenset((i, j) for i in range(n) for j in range(n) if reach[i][j])


# --------------------------------------------------------------------------
# model generation


def random_model(rng: random.Random, states: int, actions: Iterable[str], props: Iterable[str],
                 p_edge: float = 0.5, p_val: float = 0.5) -> RelationalModel:
    rel = {a: [(x, y) for x in range(states) for y in range(states) if rng.random() < p_edge]
           for a in sorted(actions)}
    sat = {p: [x for x in range(states) if rng.random() < p_val] for p in sorted(props)}
    return RelationalModel.build(states, rel, sat)


def all_models(max_states: int, actions: Iterable[str], props: Iterable[str],
               budget: int = 1_000_000):
    """Every model with 1..max_states states over the given alphabets."""
    actions = sorted(actions)
    props = sorted(props)
    total = sum(2 ** (n * n * len(actions) + n * len(props)) for n in range(1, max_states + 1))
    if total > budget:
        raise OracleBudgetExceeded(f"{total} models exceed the oracle budget of {budget}")
    for n in range(1, max_states + 1):
        cells = [(x, y) for x in range(n) for y in range(n)]
        rel_choices = list(itertools.product(range(1 << len(cells)), repeat=len(actions)))
        for rel_bits in rel_choices:
            rel = {a: [cells[i] for i in range(len(cells)) if bits >> i & 1]
                   for a, bits in zip(actions, rel_bits)}
            for val_bits in itertools.product(range(1 << n), repeat=len(props)):
                sat = {p: [x for x in range(n) if bits >> x & 1] for p, bits in zip(props, val_bits)}
                yield RelationalModel.build(n, rel, sat)


@dataclass(frozen=True)
class Same:
    models_checked: int


@dataclass(frozen=True)
class Distinguished:
    model: RelationalModel


def brute_oracle(e: Expr, f: Expr, max_states: int, actions: Iterable[str] | None = None,
                 props: Iterable[str] | None = None, budget: int = 1_000_000):
    """Compare ``e`` and ``f`` in every model up to ``max_states`` states."""
    acts = set(actions) if actions is not None else actions_of(e) | actions_of(f)
    prs = set(props) if props is not None else propositions(e) | propositions(f)
    count = 0
    for M in all_models(max_states, acts, prs, budget):
        count += 1
        if relation_rows(e, M) != relation_rows(f, M):
            return Distinguished(M)
    return Same(count)


# --------------------------------------------------------------------------
# bisimulation and unraveling


def bisimulation(M: RelationalModel, N: RelationalModel) -> set[tuple[int, int]]:
    """Largest bisimulation between ``M`` and ``N``, by partition refinement
    on their disjoint union."""
    if set(M.rel) != set(N.rel) or set(M.sat) != set(N.sat):
        raise AlphabetMismatch("models have different actions or propositions")
    acts = sorted(M.rel)
    nodes = [(M, x) for x in M.states] + [(N, y) for y in N.states]
    offset = M.size
    succ = []
    for model, x in nodes:
        shift = 0 if model is M else offset
        succ.append([[shift + y for y in range(model.size) if model.rows(a)[x] >> y & 1] for a in acts])
    props = sorted(M.sat)
    color = [tuple(x in model.sat[q] for q in props) for model, x in nodes]
    count = len(set(color))
    while True:
        sig = [(color[i], tuple(frozenset(color[j] for j in row) for row in succ[i]))
               for i in range(len(nodes))]
        ids: dict = {}
        color = [ids.setdefault(s, len(ids)) for s in sig]
        if len(ids) == count:
            break
        count = len(ids)
    return {(x, y) for x in M.states for y in N.states if color[x] == color[offset + y]}


def bisimilar(M: RelationalModel, x: int, N: RelationalModel, y: int) -> bool:
    return (x, y) in bisimulation(M, N)


def unravel(M: RelationalModel, depth: int, max_states: int = 200_000):
    """Unraveling of ``M`` into paths with at most ``depth`` states, hooked
    back into a copy of ``M`` at the frontier so that every path is bisimilar
    to its last state. Returns the model and the label of each state: a path
    tuple ``(x0, a0, x1, ...)`` or ``("copy", x)``."""
    labels: list[tuple] = [("copy", x) for x in M.states]
    index = {lab: i for i, lab in enumerate(labels)}
    rel: dict[str, list] = {a: [(x, y) for x, y in M.rel[a]] for a in M.rel}
    layer = [(x,) for x in M.states]
    for path in layer:
        index[path] = len(labels)
        labels.append(path)
    for level in range(1, depth + 1):
        nxt = []
        for path in layer:
            last = path[-1]
            src = index[path]
            for a in sorted(M.rel):
                for y in M.states:
                    if not M.rows(a)[last] >> y & 1:
                        continue
                    if level < depth:
                        ext = path + (a, y)
                        index[ext] = len(labels)
                        labels.append(ext)
                        nxt.append(ext)
                        rel[a].append((src, index[ext]))
                    else:
                        rel[a].append((src, y))
            if len(labels) > max_states:
                raise OracleBudgetExceeded(f"unraveling exceeds {max_states} states")
        layer = nxt
        if level >= depth:
            break
    sat = {p: [i for i, lab in enumerate(labels) if lab[-1] in M.sat[p]] for p in M.sat}
    names = [_label_name(lab) for lab in labels]
    return RelationalModel.build(names, rel, sat), labels


def _label_name(lab: tuple) -> str:
    if lab[0] == "copy":
        return f"={lab[1]}"
    return ".".join(str(part) for part in lab)


# --------------------------------------------------------------------------
# cay and countermodels


def cay(language: Iterable, bound: int, atoms: Sequence, actions: Sequence[str]) -> set:
    """Pairs ``(w, w <> u)`` for ``u`` in ``language`` and ``w`` ranging over
    guarded strings over ``atoms`` with at most ``bound`` atoms."""
    from .guarded import GuardedString, fusion
    language = list(language)
    if not language or bound < 1:
        return set()
    out = set()
    layer = [GuardedString((g,)) for g in atoms]
    for length in range(1, bound + 1):
        for w in layer:
            for u in language:
                v = fusion(w, u)
                if v is not None:
                    out.add((w, v))
        if length < bound:
            layer = [GuardedString(w.items + (a, g)) for w in layer for a in actions for g in atoms]
    return out


@dataclass(frozen=True)
class Countermodel:
    model: RelationalModel
    source: int
    target: int
    path: tuple[int, ...]
    side: str            # "left" if the pair lies in the left expression only
    unraveled: bool


class CountermodelError(AssertionError):
    pass


def export_countermodel(C, witness, e: Expr, f: Expr) -> Countermodel:
    """A relational model and a pair of states separating ``e`` and ``f``,
    built from the canonical model and a guarded-string witness."""
    positions = []
    for g in witness.atoms:
        pos = C.position(g)
        if pos is None:
            raise ValueError(f"witness atom {g} is not consistent")
        positions.append(pos)
    M = C.to_relational()
    src, dst = positions[0], positions[-1]
    side = _separating_side(e, f, M, src, dst)
    if side is not None:
        return Countermodel(M, src, dst, tuple(positions), side, False)

    # unravel along the witness: fresh states for its prefixes, every other
    # step leaves into the canonical model
    n = C.size
    acts = witness.actions
    k = len(positions)
    rel = {a: set(M.rel[a]) for a in M.rel}
    for i, pos in enumerate(positions):
        here = n + i
        for a in M.rel:
            for y in C.successors(a, pos):
                if i + 1 < k and a == acts[i] and y == positions[i + 1]:
                    continue
                rel[a].add((here, y))
        if i + 1 < k:
            rel[acts[i]].add((here, n + i + 1))
    sat = {p: set(xs) | {n + i for i, pos in enumerate(positions) if pos in xs}
           for p, xs in M.sat.items()}
    names = list(M.names) + [f"w{i}" for i in range(k)]
    U = RelationalModel.build(names, rel, sat)
    src, dst = n, n + k - 1
    side = _separating_side(e, f, U, src, dst)
    if side is None:
        raise CountermodelError(f"no separating pair for witness {witness}")
    return Countermodel(U, src, dst, tuple(range(n, n + k)), side, True)


def _separating_side(e, f, M, src, dst):
    in_e = bool(relation_rows(e, M)[src] >> dst & 1)
    in_f = bool(relation_rows(f, M)[src] >> dst & 1)
    if in_e == in_f:
        return None
    return "left" if in_e else "right"
