"""Command-line front end: ``fatinfer <subcommand> <term> [options]``.

Exit status is 0 for typable / yes, 1 for untypable / no and 2 for input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .bullet import analyse_bullet, infer_poly
from .checker import check_typing
from .nonredundant import (
    associated_multisystem_nr, constraints, decide_nonredundant, reduce_nr, terminals, var_tag,
)
from .schemes import print_equation
from .simple import Untypable, infer_simple
from .syntax import (
    ParseError, Typing, barendregt_check, erase_poly, erase_types, is_bullet, is_curry,
    parse_env, parse_term, parse_type, print_type, print_typing,
)


@dataclass
class Outcome:
    verdict: bool
    lines: list[str] = field(default_factory=list)
    typing: Typing | None = None
    trace: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def as_json(self) -> dict:
        out: dict = {"verdict": "yes" if self.verdict else "no", "typing": None}
        if self.typing is not None:
            out["typing"] = {
                "env": [{"var": x, "type": print_type(a)} for x, a in sorted(self.typing.env.items())],
                "result": print_type(self.typing.result),
                "binders": [
                    {"var": x, "type": print_type(a)} for x, a in sorted((self.typing.binders or {}).items())
                ],
            }
        out["trace"] = self.trace
        out["stats"] = {"rules_applied": 0, "bound_used": 0, **self.stats}
        return out


def _typing_lines(ty: Typing) -> list[str]:
    lines = [print_typing(ty)]
    if ty.binders:
        lines.append("binders: " + ", ".join(f"{x}: {print_type(a)}" for x, a in sorted(ty.binders.items())))
    return lines


# --------------------------------------------------------------------------
# subcommands


def run_curry(text: str, args: argparse.Namespace) -> Outcome:
    t = parse_term(text)
    if not is_curry(t):
        t = erase_types(t)
    try:
        ty = infer_simple(t)
    except Untypable as e:
        return Outcome(False, [f"untypable: {e.reason.replace('-', ' ')}"])
    return Outcome(True, _typing_lines(ty), ty)


def run_infer(text: str, args: argparse.Namespace) -> Outcome:
    t = parse_term(text)
    an = analyse_bullet(erase_poly(t))
    trace = list(an.reduction.trace)
    stats = {"rules_applied": an.reduction.steps, "bound_used": an.reduction.steps}
    extra = []
    if args.dot and an.graph is not None:
        extra = an.graph.to_dot().splitlines()
    if not an.typable:
        return Outcome(False, [f"untypable: {an.reason}"] + extra, None, trace, stats)
    ty = an.typing if is_bullet(t) else infer_poly(t)
    return Outcome(True, _typing_lines(ty) + extra, ty, trace, stats)


def _constrain(args: argparse.Namespace):
    if args.constrain:
        ids = frozenset(int(x) for x in args.constrain.replace(",", " ").split())
        return ids
    return args.mode


def run_nonredundant(text: str, args: argparse.Namespace) -> Outcome:
    t = parse_term(text)
    d = decide_nonredundant(t, _constrain(args))
    stats = {"rules_applied": d.rules_applied, "bound_used": d.bound_used, "bound": d.bound}
    if not d.verdict:
        return Outcome(False, [f"no: {d.reason}"], None, d.trace, stats)
    assert d.typing is not None
    return Outcome(True, ["yes"] + _typing_lines(d.typing), d.typing, d.trace, stats)


def run_multisystem(text: str, args: argparse.Namespace) -> Outcome:
    t = parse_term(text)
    lines: list[str] = []
    if is_bullet(t):
        an = analyse_bullet(t)
        lines.append("tagging:")
        lines += [f"  {v}  {u}" for u, v in an.tagging.items()]
        lines.append("multisystem:")
        lines += [f"  {print_equation(e)}" for e in an.system]
        lines.append(f"irreducible ({an.reduction.steps} steps):")
        lines += [f"  {print_equation(e)}" for e in an.reduction.system]
        if an.reduction.clash is not None:
            lines.append(f"clash: {print_equation(an.reduction.clash)}")
        if an.minimised is not None:
            lines.append("minimised:")
            lines += [f"  {e}" for e in an.minimised.equations]
        if an.graph is not None:
            lines.append("digraph edges:")
            lines += [f"  {a} -> {b}" for a, b in an.graph.edges]
            if args.dot:
                lines += an.graph.to_dot().splitlines()
        if an.cycle is not None:
            lines.append("cycle: " + " -> ".join(map(str, an.cycle)))
        lines.append("typable" if an.typable else "untypable")
        return Outcome(an.typable, lines, an.typing, list(an.reduction.trace),
                       {"rules_applied": an.reduction.steps})
    sys_ = associated_multisystem_nr(t)
    lines.append("tagging:")
    lines += [f"  {v}  {u}" for u, v in sys_.tagging.items()]
    lines.append("variable tagging:")
    lines += [f"  {o.fresh}  {o.node}" for o in sys_.vtag.occurrences]
    lines.append("multisystem:")
    lines += [f"  {print_equation(e)}" for e in sys_.equations]
    lines.append("constraints:")
    lines += [f"  {a}" for a in constraints(sys_)]
    red = reduce_nr(sys_)
    lines.append(f"irreducible ({red.steps} steps, bound {red.bound}):")
    lines += [f"  {print_equation(e)}" for e in red.system]
    try:
        tm = terminals(red.system)
    except Untypable as e:
        lines.append(f"untypable: {e.reason}")
        return Outcome(False, lines, None, red.trace, {"rules_applied": red.steps})
    lines.append("terminals: " + ", ".join(map(str, tm.terminals)))
    lines.append("groups: " + "; ".join("{" + ", ".join(map(str, g)) + "}" for g in tm.groups))
    return Outcome(True, lines, None, red.trace, {"rules_applied": red.steps})


def run_occurrences(text: str, args: argparse.Namespace) -> Outcome:
    t = parse_term(text)
    vt = var_tag(t)
    lines = ["id  var  kind  subterm"] + [str(o) for o in vt.occurrences]
    return Outcome(True, lines)


def run_check_typing(text: str, args: argparse.Namespace) -> Outcome:
    t = parse_term(text)
    env = parse_env(args.env or "")
    binders = parse_env(args.binders) if args.binders else None
    a = parse_type(args.type)
    res = check_typing(env, t, a, binders)
    if res:
        return Outcome(True, ["ok"], Typing(env, a, res.binders), res.trace)
    return Outcome(False, [f"rejected: {res.reason}"], None, res.trace)


COMMANDS = {
    "curry": run_curry,
    "infer": run_infer,
    "nonredundant": run_nonredundant,
    "multisystem": run_multisystem,
    "occurrences": run_occurrences,
    "check-typing": run_check_typing,
}


# --------------------------------------------------------------------------
# driver


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fatinfer", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("term", nargs="?", help="term text")
        sp.add_argument("--terms-file", help="file with one term per line")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for --terms-file")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--trace", action="store_true", help="print rule applications")

    for name in ("curry", "occurrences"):
        common(sub.add_parser(name))
    for name in ("infer", "multisystem"):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--dot", action="store_true", help="dump the digraph in DOT format")
    sp = sub.add_parser("nonredundant")
    common(sp)
    sp.add_argument("--mode", choices=["all", "none"], default="all")
    sp.add_argument("--constrain", help="occurrence ids to keep non-redundant, e.g. 1,3")
    sp = sub.add_parser("check-typing")
    sp.add_argument("term")
    sp.add_argument("type")
    sp.add_argument("--env", default="", help='e.g. "x: forall X. X, y: Y"')
    sp.add_argument("--binders", default="", help="types of lambda-bound names")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--trace", action="store_true")
    sp.set_defaults(terms_file=None, jobs=1)
    return p


def _render(out: Outcome, args: argparse.Namespace) -> str:
    if args.json:
        return json.dumps(out.as_json(), ensure_ascii=False, sort_keys=True)
    lines = list(out.lines)
    if args.trace:
        lines += ["trace:"] + [f"  {s}" for s in out.trace]
    return "\n".join(lines)


def _one(job: tuple[str, str, argparse.Namespace]) -> tuple[int, str, str]:
    cmd, text, args = job
    warn = ""
    try:
        t = parse_term(text)
        if not barendregt_check(t):
            warn = f"warning: bound names of {text!r} are not pairwise distinct and fresh"
        out = COMMANDS[cmd](text, args)
    except ParseError as e:
        return 2, "", f"parse error at {e.pos}: {e}"
    except ValueError as e:
        return 2, "", f"error: {e}"
    return (0 if out.verdict else 1), _render(out, args), warn


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check-typing":
        jobs = [(args.command, args.term, args)]
    elif args.terms_file:
        with open(args.terms_file, encoding="utf-8") as fh:
            terms = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
        jobs = [(args.command, t, args) for t in terms]
    elif args.term is not None:
        jobs = [(args.command, args.term, args)]
    else:
        print("error: give a term or --terms-file", file=sys.stderr)
        return 2
    if len(jobs) > 1 and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_one, jobs))
    else:
        results = [_one(j) for j in jobs]
    batch = len(jobs) > 1 or bool(args.terms_file)
    worst = 0
    for (code, text, err), (_, term, _) in zip(results, jobs):
        if err:
            print(err, file=sys.stderr)
        if batch and args.json:
            print(text or json.dumps({"verdict": "error", "term": term}, ensure_ascii=False))
        elif batch:
            print(f"{ {0: 'yes', 1: 'no', 2: 'error'}[code]}\t{term}")
        elif text:
            print(text)
        worst = max(worst, code)
    if not batch:
        return results[0][0]
    return 2 if worst == 2 else 0


if __name__ == "__main__":
    sys.exit(main())
