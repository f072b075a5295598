"""Shared test fixtures: a seeded random term corpus, a curated list for the
brute-force oracle, and the oracle itself."""

from __future__ import annotations

import random
from itertools import product

from fatinfer.checker import check_nonredundant, synthesize
from fatinfer.simple import UnificationError, _Gen, constraints_of, unify
from fatinfer.syntax import (
    Abs, App, Arrow, Forall, Gen, Inst, Term, TVar, Type, Var, collapse_type, erase_types,
    free_vars_ordered, parse_term, subterms, term_size, term_type_vars,
)

SEED = 20240917
FREE = ("x", "y", "f")
TYVARS = ("X", "Y")


def random_term(rng: random.Random, size: int, scope: tuple[str, ...] = (), counter: list | None = None) -> Term:
    """A Barendregt-form Polymorphic Curry term with exactly ``size`` nodes."""
    counter = counter if counter is not None else [0]
    if size <= 1:
        return Var(rng.choice(scope + FREE))
    kinds = ["abs", "inst", "gen"] + (["app"] * 3 if size >= 3 else [])
    kind = rng.choice(kinds)
    if kind == "app":
        left = rng.randint(1, size - 2)
        return App(random_term(rng, left, scope, counter), random_term(rng, size - 1 - left, scope, counter))
    if kind == "abs":
        counter[0] += 1
        z = f"z{counter[0]}"
        return Abs(z, random_term(rng, size - 1, scope + (z,), counter))
    if kind == "inst":
        return Inst(random_term(rng, size - 1, scope, counter), rng.choice(TYVARS))
    return Gen(rng.choice(TYVARS), random_term(rng, size - 1, scope, counter))


def corpus(n: int = 500, max_size: int = 12, seed: int = SEED) -> list[Term]:
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        t = random_term(rng, rng.randint(1, max_size))
        assert term_size(t) <= max_size
        out.append(t)
    return out


CURATED = [
    "x X", "(x X) Y", r"/\X. x X", r"/\X. (x Y)", r"(/\X. \x. x) Y", "(y (x X)) (x Y)",
    r"\x. x X", r"\x. (x X) X", r"(\x. x X) y", "(x X) y", r"\x. x", r"/\X. \x. x",
    r"/\X. \x. x X", r"\x. /\X. x", r"\x. /\X. x X", "y (x X) (x X)", "f (x X) (x Y)",
    r"/\X. /\Y. x", r"/\X. y (x X)", "(x X) (y Y)", r"\x. \y. y (x X)", r"(\x. x) (y X)",
    r"/\Y. (x X) Y", "((x X) Y) X", r"\y. y (y X)", "x X X", r"/\X. (\x. x) (y X)",
    r"(/\X. \x. \y. x) Y", r"\x. (/\X. x) Y", r"/\X. \y. y X", r"y (/\X. x X)",
    "f (g X) (g X)", r"(/\X. x) X",
]


def curated_terms() -> list[Term]:
    return [parse_term(s) for s in CURATED]


# --------------------------------------------------------------------------
# brute-force oracle


def types_upto(size: int, free: tuple[str, ...], max_vars: int = 3) -> list[Type]:
    """Every type with at most ``size`` nodes over ``free`` and bound B1, B2, ...

    Bound names are chosen by nesting depth; at most ``max_vars`` distinct names.
    """
    memo: dict[tuple[int, int], list[Type]] = {}

    def gen(n: int, depth: int) -> list[Type]:
        key = (n, depth)
        if key in memo:
            return memo[key]
        out: list[Type] = []
        if n == 1:
            out = [TVar(v) for v in free] + [TVar(f"B{i + 1}") for i in range(depth)]
        else:
            for ls in range(1, n - 1):
                for left in gen(ls, depth):
                    for right in gen(n - 1 - ls, depth):
                        out.append(Arrow(left, right))
            out += [Forall(f"B{depth + 1}", b) for b in gen(n - 1, depth + 1)]
        memo[key] = out
        return out

    def names(a: Type) -> set[str]:
        if isinstance(a, TVar):
            return {a.name}
        if isinstance(a, Arrow):
            return names(a.left) | names(a.right)
        return {a.binder} | names(a.body)

    return [a for n in range(1, size + 1) for a in gen(n, 0) if len(names(a)) <= max_vars]


def _simply_consistent(t: Term, assign: dict[str, Type]) -> bool:
    gen = _Gen()
    gen.names.update(assign)
    _, cs = constraints_of(erase_types(t), gen)
    try:
        unify(cs)
    except UnificationError:
        return False
    return True


def assumption_names(t: Term) -> list[str]:
    names = list(free_vars_ordered(t)) + [u.binder for u in subterms(t) if isinstance(u, Abs)]
    return list(dict.fromkeys(names))


def oracle_nonredundant(t: Term, max_size: int = 6, fresh: tuple[str, ...] = ("F",)):
    """First typing (in enumeration order) accepted by check_nonredundant, or None."""
    names = assumption_names(t)
    free = tuple(sorted(term_type_vars(t))) + fresh
    cands = types_upto(max_size, free)
    by_shape: dict[Type, list[Type]] = {}
    for a in cands:
        by_shape.setdefault(collapse_type(a), []).append(a)
    shapes = list(by_shape)
    if not names:
        res = synthesize({}, {}, t)
        if res and check_nonredundant({}, t, res.derived, {}):
            return {}, res.derived
        return None
    fv = set(free_vars_ordered(t))
    for combo in product(shapes, repeat=len(names)):
        if not _simply_consistent(t, dict(zip(names, combo))):
            continue
        for full in product(*(by_shape[s] for s in combo)):
            assign = dict(zip(names, full))
            env = {x: a for x, a in assign.items() if x in fv}
            binders = {x: a for x, a in assign.items() if x not in fv}
            res = synthesize(env, binders, t)
            if not res:
                continue
            if check_nonredundant(env, t, res.derived, binders):
                return assign, res.derived
    return None
