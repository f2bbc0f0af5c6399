"""Command-line interface: ``kadt <subcommand> ...``.

Exit codes: 0 equivalent (or success), 1 nonequivalent (or unsatisfiable),
2 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .canonical import DEFAULT_MAX_ATOMS, BudgetExceeded, canonical_for, sat
from .closure import gamma_for
from .decide import decide
from .relational import RelationalModel, evaluate
from .syntax import ExprSyntaxError, Signature, Sum, classify, embed_aka, is_formula, parse, to_text


def _props(text: str | None) -> list[str]:
    if not text:
        return []
    return [p for p in text.replace(",", " ").split() if p]


def _parse_all(texts, props):
    sig = Signature(props)
    return [parse(t, signature=sig) for t in texts]


def _emit(args, data: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def cmd_decide(args) -> int:
    e, f = _parse_all([args.left, args.right], _props(args.props))
    if args.leq:
        e = Sum(e, f)
    v = decide(e, f, max_atoms=args.max_atoms)
    data = v.to_dict()
    lines = [f"{'EQUIVALENT' if v.equivalent else 'NONEQUIVALENT'}  (|Gamma| = {v.gamma_size}, "
             f"{v.atoms} consistent atoms)"]
    if not v.equivalent:
        lines += [f"witness ({v.side} side only): {v.witness}",
                  f"separating pair: ({v.point}, {v.target})",
                  "countermodel:", v.countermodel.dumps()]
    _emit(args, data, lines)
    return 0 if v.equivalent else 1


def cmd_sat(args) -> int:
    (phi,) = _parse_all([args.formula], _props(args.props))
    if not is_formula(phi):
        raise ValueError(f"{to_text(phi)} is not a formula")
    ok, model, state = sat(phi, max_atoms=args.max_atoms)
    data = {"sat": ok}
    lines = ["SAT" if ok else "UNSAT"]
    if ok:
        data.update(state=state, model=model.to_dict())
        lines += [f"state: {state}", model.dumps()]
    _emit(args, data, lines)
    return 0 if ok else 1


def cmd_atoms(args) -> int:
    exprs = _parse_all(args.exprs, _props(args.props))
    C = canonical_for(exprs, max_atoms=args.max_atoms)
    atoms = [str(a) for a in C.atoms]
    _emit(args, {"gamma": [to_text(p) for p in C.gamma], "atoms": atoms}, atoms)
    return 0


def cmd_closure(args) -> int:
    exprs = _parse_all(args.exprs, _props(args.props))
    gamma = [to_text(p) for p in gamma_for(exprs)]
    _emit(args, {"gamma": gamma}, gamma)
    return 0


def cmd_eval(args) -> int:
    with open(args.model) as fh:
        M = RelationalModel.loads(fh.read())
    (e,) = _parse_all([args.expr], list(M.sat) + _props(args.props))
    pairs = sorted(evaluate(e, M))
    _emit(args, {"pairs": [list(p) for p in pairs]},
          [f"({M.names[x]}, {M.names[y]})" for x, y in pairs])
    return 0


def cmd_fragment(args) -> int:
    (e,) = _parse_all([args.expr], _props(args.props))
    frags = sorted(classify(e))
    _emit(args, {"fragments": frags}, [" ".join(frags) if frags else "(none)"])
    return 0


def cmd_embed(args) -> int:
    (e,) = _parse_all([args.expr], _props(args.props))
    out = to_text(embed_aka(e))
    _emit(args, {"embedded": out}, [out])
    return 0


def cmd_fuzz(args) -> int:
    from .fuzz import fuzz
    report = fuzz(args.count, args.size, args.seed, models=args.models,
                  brute_states=args.brute, jobs=args.jobs)
    data = {"summary": report.summary(),
            "failures": [{"index": r.index, "left": r.left, "right": r.right, "problems": r.problems}
                         for r in report.failures]}
    lines = [report.summary()] + [f"#{r.index}: {r.left} | {r.right}: {'; '.join(r.problems)}"
                                  for r in report.failures]
    _emit(args, data, lines)
    return 0 if report.ok else 1


def cmd_laws(args) -> int:
    from .laws import law_suite, substitution_pool
    pool = substitution_pool(args.count, args.seed)

    def progress(law, report):
        if not args.json:
            print(f"law {law.number:2d} {law.name}: ok", flush=True)

    report = law_suite(pool, abort=False, progress=progress, max_atoms=args.max_atoms)
    lines = [f"{report.checked} instances, {len(report.failures)} failures, {report.seconds:.1f}s"]
    lines += [f"FAIL law {r.law.number} ({r.law.name}): {r.substitution}" for r in report.failures]
    _emit(args, {"checked": report.checked,
                 "failures": [{"law": r.law.number, "substitution": str(r.substitution)}
                              for r in report.failures]}, lines)
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kadt", description="Decide equivalence of expressions of "
                                 "Kleene algebra with domain, antidomain and tests.")
    ap.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--props", help="proposition names, comma or space separated")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--max-atoms", type=int, default=DEFAULT_MAX_ATOMS,
                        help="fail when more candidate atoms than this arise (default %(default)s)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", parents=[common], help="decide e == f")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--leq", action="store_true", help="decide e <= f instead")
    p.set_defaults(run=cmd_decide)

    p = sub.add_parser("sat", parents=[common], help="satisfiability of a formula")
    p.add_argument("formula")
    p.set_defaults(run=cmd_sat)

    p = sub.add_parser("atoms", parents=[common], help="consistent atoms of the closure")
    p.add_argument("exprs", nargs="+")
    p.set_defaults(run=cmd_atoms)

    p = sub.add_parser("closure", parents=[common], help="closed parameter set")
    p.add_argument("exprs", nargs="+")
    p.set_defaults(run=cmd_closure)

    p = sub.add_parser("eval", parents=[common], help="evaluate in a model file")
    p.add_argument("expr")
    p.add_argument("--model", required=True)
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("fragment", parents=[common], help="fragments containing an expression")
    p.add_argument("expr")
    p.set_defaults(run=cmd_fragment)

    p = sub.add_parser("embed", parents=[common], help="embed into the action-only fragment")
    p.add_argument("expr")
    p.set_defaults(run=cmd_embed)

    p = sub.add_parser("fuzz", parents=[common], help="random cross-checks")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--size", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--models", type=int, default=100, help="random models per equivalent pair")
    p.add_argument("--brute", type=int, default=0, help="also run the brute-force oracle up to N states")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(run=cmd_fuzz)

    p = sub.add_parser("laws", parents=[common], help="run the law corpus")
    p.add_argument("--count", type=int, default=100, help="substitutions in the pool")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=cmd_laws)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.run(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExprSyntaxError as exc:
        print(f"error: syntax: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
