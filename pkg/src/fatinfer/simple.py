"""Curry-style typability through the collapse to simple types.

Unification variables are type variables whose name starts with ``?``; every
other name is a rigid constant.  Assumption variables are typed by name, so
two binders with the same name share one unification variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    Abs, App, Arrow, Forall, Term, TVar, Type, Typing, Var,
    collapse_type, erase_types, free_vars, free_vars_ordered, is_curry,
)

Subst = dict[str, Type]


class UnificationError(Exception):
    def __init__(self, kind: str, left: Type, right: Type):
        super().__init__(f"{kind}: {left} = {right}")
        self.kind = kind
        self.left = left
        self.right = right


class Untypable(Exception):
    """A term has no typing; ``reason`` says why."""

    def __init__(self, reason: str, detail: object = None):
        super().__init__(reason)
        self.reason = reason
        self.detail = detail


def is_meta(a: Type) -> bool:
    return isinstance(a, TVar) and a.name.startswith("?")


def apply(s: Subst, a: Type) -> Type:
    if isinstance(a, TVar):
        if a.name in s:
            return apply(s, s[a.name])
        return a
    if isinstance(a, Arrow):
        return Arrow(apply(s, a.left), apply(s, a.right))
    raise ValueError(f"quantified type in a simple constraint: {a}")


def _occurs(name: str, a: Type, s: Subst) -> bool:
    a = apply(s, a)
    if isinstance(a, TVar):
        return a.name == name
    return _occurs(name, a.left, s) or _occurs(name, a.right, s)


def unify(
    constraints: list[tuple[Type, Type]],
    s: Subst | None = None,
    flexible: set[str] | None = None,
) -> Subst:
    """Most general unifier of quantifier-free equations.

    ``flexible`` names the unification variables; by default they are the
    ``?``-prefixed names.  Raises UnificationError with kind ``occurs-check``
    or ``constructor-clash``.
    """
    s = dict(s or {})
    if flexible is None:
        is_var = is_meta
    else:
        def is_var(a: Type) -> bool:
            return isinstance(a, TVar) and a.name in flexible

    work = list(constraints)
    while work:
        left, right = work.pop(0)
        if isinstance(left, Forall) or isinstance(right, Forall):
            raise ValueError("simple constraints may not contain quantifiers")
        a, b = apply(s, left), apply(s, right)
        if a == b:
            continue
        if is_var(b) and not is_var(a):
            a, b = b, a
        if is_var(a):
            if _occurs(a.name, b, s):
                raise UnificationError("occurs-check", a, b)
            s[a.name] = b
        elif isinstance(a, Arrow) and isinstance(b, Arrow):
            work[:0] = [(a.left, b.left), (a.right, b.right)]
        else:
            raise UnificationError("constructor-clash", a, b)
    return {k: apply(s, v) for k, v in s.items()}


@dataclass
class _Gen:
    counter: int = 0
    names: dict[str, Type] = field(default_factory=dict)

    def fresh(self) -> Type:
        self.counter += 1
        return TVar(f"?{self.counter}")

    def var(self, name: str) -> Type:
        if name not in self.names:
            self.names[name] = self.fresh()
        return self.names[name]


def constraints_of(t: Term, gen: _Gen) -> tuple[Type, list[tuple[Type, Type]]]:
    """Type of ``t`` and the equations it imposes (names typed globally)."""
    out: list[tuple[Type, Type]] = []

    def walk(u: Term) -> Type:
        if isinstance(u, Var):
            return gen.var(u.name)
        if isinstance(u, Abs):
            return Arrow(gen.var(u.binder), walk(u.body))
        if isinstance(u, App):
            f = walk(u.fun)
            a = walk(u.arg)
            r = gen.fresh()
            out.append((f, Arrow(a, r)))
            return r
        raise ValueError("not a Curry term")

    return walk(t), out


def canonical_names(types: list[Type]) -> Subst:
    """Rename unification variables to a1, a2, ... in first-use order."""
    ren: Subst = {}

    def walk(a: Type) -> None:
        if isinstance(a, TVar):
            if is_meta(a) and a.name not in ren:
                ren[a.name] = TVar(f"a{len(ren) + 1}")
        elif isinstance(a, Arrow):
            walk(a.left)
            walk(a.right)

    for a in types:
        walk(a)
    return ren


def infer_simple(t: Term) -> Typing:
    """Principal simple typing of a Curry term.

    Raises Untypable with the failing unification kind.
    """
    if not is_curry(t):
        raise ValueError("infer_simple expects a Curry term")
    gen = _Gen()
    ty, cs = constraints_of(t, gen)
    try:
        s = unify(cs)
    except UnificationError as e:
        raise Untypable(e.kind, e) from None
    env_names = free_vars_ordered(t)
    result = apply(s, ty)
    env = {x: apply(s, gen.var(x)) for x in env_names}
    binders = {x: apply(s, v) for x, v in gen.names.items() if x not in env}
    ren = canonical_names([result, *env.values(), *binders.values()])
    return Typing(
        env={x: apply(ren, a) for x, a in env.items()},
        result=apply(ren, result),
        binders={x: apply(ren, a) for x, a in binders.items()},
    )


def curry_typable(t: Term) -> bool:
    try:
        infer_simple(t)
    except Untypable:
        return False
    return True


def collapse_typing(env: dict[str, Type], a: Type) -> tuple[dict[str, Type], Type]:
    return {x: collapse_type(b) for x, b in env.items()}, collapse_type(a)


def check_simple(env: dict[str, Type], t: Term, a: Type) -> bool:
    """Does ``env |- t : a`` hold in the simply typed calculus?

    Variables of ``env`` and ``a`` are rigid; binders are typed by name.
    """
    if not is_curry(t):
        t = erase_types(t)
    if not free_vars(t) <= set(env):
        return False
    gen = _Gen()
    for x, b in env.items():
        gen.names[x] = b
    ty, cs = constraints_of(t, gen)
    try:
        unify(cs + [(ty, a)])
    except UnificationError:
        return False
    return True

