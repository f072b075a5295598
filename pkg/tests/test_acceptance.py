"""Acceptance suite: one check per criterion, each reported as a pass/fail line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from corpus import CURATED, corpus, curated_terms, oracle_nonredundant  # noqa: E402

from fatinfer.bullet import analyse_bullet, infer_poly, termination_bound, typable_bullet  # noqa: E402
from fatinfer.checker import check_nonredundant, check_typing  # noqa: E402
from fatinfer.nonredundant import (  # noqa: E402
    associated_multisystem_nr, decide_nonredundant, essential_places,
)
from fatinfer.schemes import print_equation  # noqa: E402
from fatinfer.simple import Untypable, curry_typable  # noqa: E402
from fatinfer.syntax import (  # noqa: E402
    alpha_eq, erase_poly, erase_types, is_curry, parse_term, parse_type, print_term,
)

REPORT: list[str] = []


def report(n: int, title: str, ok: bool, detail: str) -> bool:
    line = f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    REPORT.append(line)
    print(line)
    return ok


_CORPUS = None


def the_corpus():
    global _CORPUS
    if _CORPUS is None:
        _CORPUS = corpus(500, 12)
    return _CORPUS


# ---------------------------------------------------------------------------
# 1: the bullet-calculus worked example

GOLDEN = r"/\*. ((/\*. x1) *) (\x1. x0 (/\*. x2))"
G_SYSTEM = ["α0 = ∀•. α1", "α2 = α3 → α1", "α4 = ∀•. α2", "α3 = α7 → α5", "α4 = ∀•. α7",
            "α8 = α6 → α5", "α6 = ∀•. α9"]
G_IRRED = ["α0 = ∀•. α1", "α3 → α1 = α7 = α2", "∀•. α2 = α4", "α3 = α7 → α5", "α8 = α6 → α5",
           "α6 = ∀•. α9"]
G_MIN = ["α0 = ∀•. α1", "α2 = α3 → α1", "α4 = ∀•. α2", "α3 = α2 → α5", "α8 = α6 → α5", "α6 = ∀•. α9"]
G_EDGES = {(0, 1), (4, 2), (2, 1), (2, 3), (3, 2), (3, 5), (8, 6), (8, 5), (6, 9)}


def criterion_1():
    an = analyse_bullet(parse_term(GOLDEN))
    checks = {
        "system": [print_equation(e) for e in an.system] == G_SYSTEM,
        "irreducible": sorted(print_equation(e) for e in an.reduction.system) == sorted(G_IRRED),
        "minimised": an.minimised is not None and sorted(map(str, an.minimised.equations)) == sorted(G_MIN),
        "edges": an.graph is not None and {(a.index, b.index) for a, b in an.graph.edges} == G_EDGES,
        "cycle": an.cycle is not None and {v.index for v in an.cycle} == {2, 3},
        "untypable": not an.typable,
    }
    bad = [k for k, v in checks.items() if not v]
    return not bad, "exact structural match" if not bad else f"mismatch in {bad}"


# ---------------------------------------------------------------------------
# 2: refutations carry the violated axiom

def criterion_2():
    out = []
    d = decide_nonredundant(parse_term(r"/\X. (x Y)"))
    ok1 = (not d.verdict) and "Occ(" in d.reason and "¬Occ(" in d.reason and d.reason[:2] in ("A2", "A5", "A4")
    out.append(f"/\\X. (x Y) -> {'No' if not d.verdict else 'Yes'} ({d.reason})")
    ok2 = True
    for text in ["h (f (x X)) (f (x Y))", r"(\g. g) ((\f. \h. h (f (x X)) (f (x Y))) w)"]:
        d = decide_nonredundant(parse_term(text))
        good = (not d.verdict) and d.reason.startswith("A7") and "X = Y, a contradiction" in d.reason
        ok2 = ok2 and good
        out.append(f"{text} -> {'No' if not d.verdict else 'Yes'} ({d.reason.split(':')[0]})")
    return ok1 and ok2, "; ".join(out)


# ---------------------------------------------------------------------------
# 3: witnesses

def criterion_3():
    notes = []
    ok = True
    cases = [
        ("(y (x X)) (x Y)", lambda ty: alpha_eq(ty.env["x"], parse_type("forall X1. X1"))),
        ("(x X) Y", lambda ty: alpha_eq(ty.env["x"], parse_type("forall X1. forall X2. X2 -> X1"))),
        (r"(/\X. \x. x) Y", lambda ty: ty.binders.get("x") == parse_type("X")),
    ]
    for text, want in cases:
        t = parse_term(text)
        d = decide_nonredundant(t)
        good = bool(d.verdict) and want(d.typing) and check_nonredundant(
            d.typing.env, t, d.typing.result, d.typing.binders)
        ok = ok and good
        notes.append(f"{text}: {d.typing}" + (f" [{', '.join(f'{k}: {v}' for k, v in d.typing.binders.items())}]"
                                             if d.typing and d.typing.binders else ""))
    return ok, "; ".join(notes)


# ---------------------------------------------------------------------------
# 4: equivalences on the random corpus

def criterion_4():
    """Curry terms: all three verdicts agree.  Every term: the bullet verdict
    equals the lifted inference verdict, and Fat typability implies simple
    typability of the erasure.  The literal three-way equality is also counted
    and reported; it fails on terms that apply a generalisation or instantiate
    a non-quantified type (see the decisions ledger)."""
    n_curry = bad = literal = 0
    example = ""
    for t in the_corpus():
        c = curry_typable(erase_types(t))
        b = typable_bullet(erase_poly(t))
        try:
            infer_poly(t)
            p = True
        except Untypable:
            p = False
        if b != p or (p and not c):
            bad += 1
        if is_curry(t):
            n_curry += 1
            if not (c == b == p):
                bad += 1
        if not (c == b == p):
            literal += 1
            example = example or print_term(t)
    detail = (f"{len(the_corpus())} terms ({n_curry} Curry): {bad} disagreements; "
              f"literal [M]-vs-|M| equality off on {literal} Poly Curry terms, e.g. {example}")
    return bad == 0 and n_curry > 0, detail


# ---------------------------------------------------------------------------
# 5: termination bound

def criterion_5():
    viol = 0
    worst = 0.0
    for t in the_corpus():
        an = analyse_bullet(erase_poly(t))
        bound = termination_bound(an.system)
        viol += an.reduction.steps > bound
        worst = max(worst, an.reduction.steps / bound if bound else 0.0)
    return viol == 0, f"{viol} violations; max steps/bound ratio {worst:.3f}"


# ---------------------------------------------------------------------------
# 6 and 7: self-verification and witness minimality

_DECISIONS = None


def decisions():
    global _DECISIONS
    if _DECISIONS is None:
        _DECISIONS = [(t, decide_nonredundant(t, "all")) for t in the_corpus()]
    return _DECISIONS


def criterion_6():
    typings = typings_ok = witnesses = witnesses_ok = 0
    for t, d in decisions():
        try:
            ty = infer_poly(t)
        except Untypable:
            ty = None
        if ty is not None:
            typings += 1
            typings_ok += bool(check_typing(ty.env, t, ty.result, ty.binders))
        if d.verdict:
            witnesses += 1
            witnesses_ok += check_nonredundant(d.typing.env, t, d.typing.result, d.typing.binders)
    ok = typings_ok == typings and witnesses_ok == witnesses and witnesses > 0
    return ok, f"typings {typings_ok}/{typings} check; witnesses {witnesses_ok}/{witnesses} non-redundant"


def criterion_7():
    witnesses = bad = 0
    largest = 0
    for t, d in decisions():
        if not d.verdict:
            continue
        witnesses += 1
        mn = associated_multisystem_nr(t).search_bound()
        for g, n in d.witness.sizes.items():
            largest = max(largest, n)
            if n > mn or essential_places(d.witness, g) != set(range(n)):
                bad += 1
    return bad == 0 and witnesses > 0, f"{witnesses} witnesses, {bad} failures, largest group size {largest}"


# ---------------------------------------------------------------------------
# 8: brute-force oracle

def criterion_8():
    mismatches = []
    yes_oracle = yes_engine = 0
    start = time.time()
    for text, t in zip(CURATED, curated_terms()):
        o = oracle_nonredundant(t)
        d = decide_nonredundant(t)
        yes_oracle += o is not None
        yes_engine += bool(d.verdict)
        if o is not None and not d.verdict:
            mismatches.append(f"{text}: oracle Yes, engine No")
        if d.verdict and not check_nonredundant(d.typing.env, t, d.typing.result, d.typing.binders):
            mismatches.append(f"{text}: engine witness rejected")
    detail = (f"{len(CURATED)} terms, oracle Yes {yes_oracle}, engine Yes {yes_engine}, "
              f"{len(mismatches)} mismatches, {time.time() - start:.1f}s")
    if mismatches:
        detail += " (" + "; ".join(mismatches) + ")"
    return not mismatches and len(CURATED) >= 30, detail


CRITERIA = [
    (1, "bullet worked example", criterion_1),
    (2, "refutations", criterion_2),
    (3, "witnesses", criterion_3),
    (4, "typability equivalences", criterion_4),
    (5, "termination bound", criterion_5),
    (6, "self-verification", criterion_6),
    (7, "witness minimality", criterion_7),
    (8, "brute-force oracle", criterion_8),
]


def _run(n):
    _, title, fn = CRITERIA[n - 1]
    ok, detail = fn()
    return report(n, title, ok, detail)


def test_criterion_1():
    assert _run(1)


def test_criterion_2():
    assert _run(2)


def test_criterion_3():
    assert _run(3)


def test_criterion_4():
    assert _run(4)


def test_criterion_5():
    assert _run(5)


def test_criterion_6():
    assert _run(6)


def test_criterion_7():
    assert _run(7)


def test_criterion_8():
    assert _run(8)


if __name__ == "__main__":
    results = [_run(n) for n, _, _ in CRITERIA]
    sys.exit(0 if all(results) else 1)
