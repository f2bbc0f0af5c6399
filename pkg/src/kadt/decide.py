"""The decision pipeline: closure, canonical model, guarded automata,
language comparison and countermodel export."""

from __future__ import annotations

from dataclasses import dataclass

from .canonical import DEFAULT_MAX_ATOMS, CanonicalModel, build_canonical
from .closure import gamma_for
from .guarded import GuardedString, Witness, canonical_interpret, language_equal, member
from .relational import Countermodel, RelationalModel, export_countermodel
from .syntax import Expr, Sum, actions, to_text


@dataclass(frozen=True)
class Verdict:
    equivalent: bool
    gamma_size: int
    atoms: int
    witness: GuardedString | None = None
    countermodel: RelationalModel | None = None
    point: int | None = None
    target: int | None = None
    side: str | None = None      # "left" or "right": which side holds the witness

    def __bool__(self):
        return self.equivalent

    def to_dict(self) -> dict:
        out = {"verdict": "equivalent" if self.equivalent else "nonequivalent",
               "gamma": self.gamma_size, "atoms": self.atoms}
        if not self.equivalent:
            out.update({
                "witness": str(self.witness),
                "side": self.side,
                "point": self.point,
                "target": self.target,
                "countermodel": self.countermodel.to_dict(),
            })
        return out


class WitnessInvalid(AssertionError):
    pass


def canonical_for_pair(e: Expr, f: Expr, max_atoms: int = DEFAULT_MAX_ATOMS) -> CanonicalModel:
    gamma = gamma_for([e, f])
    return build_canonical(gamma, actions(e) | actions(f), max_atoms=max_atoms, check_closed=False)


def decide(e: Expr, f: Expr, max_atoms: int = DEFAULT_MAX_ATOMS, validate: bool = True) -> Verdict:
    """Equivalence of two expressions, with evidence when they differ."""
    C = canonical_for_pair(e, f, max_atoms)
    memo: dict = {}
    result = language_equal(canonical_interpret(e, C, memo), canonical_interpret(f, C, memo))
    if not isinstance(result, Witness):
        return Verdict(True, len(C.gamma), C.size)
    w = result.word
    if validate and member(w, e, C) == member(w, f, C):
        raise WitnessInvalid(f"witness {w} does not separate {to_text(e)} and {to_text(f)}")
    cm: Countermodel = export_countermodel(C, w, e, f)
    return Verdict(False, len(C.gamma), C.size, w, cm.model, cm.source, cm.target, cm.side)


def decide_leq(e: Expr, f: Expr, **kw) -> Verdict:
    """``e <= f`` holds iff ``e + f`` is equivalent to ``f``."""
    return decide(Sum(e, f), f, **kw)
