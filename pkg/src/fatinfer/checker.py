"""Derivation checking for Polymorphic Curry typings.

Checking runs in two phases.  Lambda binders carry no annotation in the term,
so when their types are not supplied a first pass solves for them with
unification variables (deferring instantiation goals until the instantiated
type is known).  The second pass is a plain syntax-directed replay of the five
typing rules with every binder annotated; only that pass decides the answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .syntax import (
    Abs, App, Arrow, Forall, Gen, Inst, Term, TVar, Type, Var,
    all_type_names, alpha_eq, free_type_vars, free_vars, fresh_name, print_type,
    subst_type_avoiding, subterms, term_type_vars,
)

Path = tuple[int, ...]


class NotTypable(ValueError):
    """Raised by check_nonredundant when the typing does not check at all."""


@dataclass
class CheckResult:
    ok: bool
    reason: str = ""
    binders: dict[str, Type] = field(default_factory=dict)
    # path of each Inst node -> type of its function part,
    # path of each Gen node -> type of its body
    induced: dict[Path, Type] = field(default_factory=dict)
    trace: list[str] = field(default_factory=list)
    derived: Type | None = None

    def __bool__(self) -> bool:
        return self.ok


class _Fail(Exception):
    pass


def _node(t: Term, path: Path) -> Term:
    for i in path:
        if isinstance(t, App):
            t = t.fun if i == 0 else t.arg
        elif isinstance(t, Inst):
            t = t.fun
        else:
            t = t.body
    return t


# --------------------------------------------------------------------------
# phase two: annotated replay


def _replay(env: dict[str, Type], binders: dict[str, Type], t: Term, a: Type | None) -> CheckResult:
    induced: dict[Path, Type] = {}
    trace: list[str] = []

    def synth(gamma: dict[str, Type], u: Term, path: Path) -> Type:
        if isinstance(u, Var):
            if u.name not in gamma:
                raise _Fail(f"unbound assumption variable {u.name}")
            trace.append(f"VAR {u.name} : {print_type(gamma[u.name])}")
            return gamma[u.name]
        if isinstance(u, Abs):
            if u.binder not in binders:
                raise _Fail(f"no type for binder {u.binder}")
            b = binders[u.binder]
            body = synth({**gamma, u.binder: b}, u.body, path + (0,))
            trace.append(f"ABS {u.binder}")
            return Arrow(b, body)
        if isinstance(u, App):
            f = synth(gamma, u.fun, path + (0,))
            x = synth(gamma, u.arg, path + (1,))
            if not isinstance(f, Arrow):
                raise _Fail(f"APP: function has type {print_type(f)}")
            if not alpha_eq(f.left, x):
                raise _Fail(
                    f"APP: argument type {print_type(x)} does not match {print_type(f.left)}"
                )
            trace.append("APP")
            return f.right
        if isinstance(u, Inst):
            f = synth(gamma, u.fun, path + (0,))
            if not isinstance(f, Forall):
                raise _Fail(f"INST: {print_type(f)} is not quantified")
            induced[path] = f
            trace.append(f"INST {u.tyvar}")
            return subst_type_avoiding(f.body, f.binder, u.tyvar)
        # Gen: the proviso ranges over the assumptions the body actually uses
        for x in sorted(free_vars(u.body) & set(gamma)):
            if u.binder in free_type_vars(gamma[x]):
                raise _Fail(f"GEN: {u.binder} is free in the type of {x}")
        body = synth(gamma, u.body, path + (0,))
        induced[path] = body
        trace.append(f"GEN {u.binder}")
        return Forall(u.binder, body)

    try:
        got = synth(dict(env), t, ())
    except _Fail as e:
        return CheckResult(False, str(e), dict(binders), induced, trace)
    if a is None:
        return CheckResult(True, "", dict(binders), induced, trace, got)
    if not alpha_eq(got, a):
        return CheckResult(
            False, f"derived {print_type(got)}, claimed {print_type(a)}", dict(binders), induced, trace
        )
    return CheckResult(True, "", dict(binders), induced, trace, got)


# --------------------------------------------------------------------------
# phase one: binder reconstruction


_MAX_BRANCHES = 256


def _occurrence_variants(a: Type, y: str, z: str) -> list[Type]:
    """All types obtained from ``a`` by turning some free ``y`` into ``z``."""
    if isinstance(a, TVar):
        return [a, TVar(z)] if a.name == y else [a]
    if isinstance(a, Arrow):
        return [Arrow(l, r) for l in _occurrence_variants(a.left, y, z)
                for r in _occurrence_variants(a.right, y, z)]
    if a.binder in (y, z):
        return [a]
    return [Forall(a.binder, b) for b in _occurrence_variants(a.body, y, z)]


class _Solver:
    def __init__(self, avoid: set[str]):
        self.s: dict[str, Type] = {}
        self.n = 0
        self.avoid = set(avoid)
        self.deferred: list[tuple] = []

    def copy(self) -> "_Solver":
        other = _Solver(self.avoid)
        other.s = dict(self.s)
        other.n = self.n
        other.deferred = list(self.deferred)
        return other

    def meta(self) -> TVar:
        self.n += 1
        return TVar(f"?{self.n}")

    def rigid(self, prefix: str = "Q") -> TVar:
        name = fresh_name(self.avoid, prefix)
        self.avoid.add(name)
        return TVar(name)

    def head(self, a: Type) -> Type:
        while isinstance(a, TVar) and a.name in self.s:
            a = self.s[a.name]
        return a

    def resolve(self, a: Type) -> Type:
        a = self.head(a)
        if isinstance(a, Arrow):
            return Arrow(self.resolve(a.left), self.resolve(a.right))
        if isinstance(a, Forall):
            return Forall(a.binder, self.resolve(a.body))
        return a

    def metas(self, a: Type) -> set[str]:
        return {v for v in all_type_names(self.resolve(a)) if v.startswith("?")}

    def unify(self, a: Type, b: Type) -> None:
        a, b = self.head(a), self.head(b)
        if a == b:
            return
        if isinstance(b, TVar) and b.name.startswith("?"):
            a, b = b, a
        if isinstance(a, TVar) and a.name.startswith("?"):
            if a.name in self.metas(b):
                raise _Fail("occurs check")
            self.s[a.name] = b
        elif isinstance(a, Arrow) and isinstance(b, Arrow):
            self.unify(a.left, b.left)
            self.unify(a.right, b.right)
        elif isinstance(a, Forall) and isinstance(b, Forall):
            if a.binder == b.binder:
                self.unify(a.body, b.body)
            elif not self.metas(a) and not self.metas(b):
                if not alpha_eq(self.resolve(a), self.resolve(b)):
                    raise _Fail("quantified types differ")
            else:
                self.deferred.append(("eq", a, b))
        else:
            raise _Fail(f"cannot unify {print_type(a)} with {print_type(b)}")

    def inst(self, f: Type, y: str, r: Type) -> bool:
        """Try to discharge ``r = body(f)[y/binder(f)]``; False if stuck."""
        f = self.head(f)
        if isinstance(f, Forall):
            if self.metas(f.body):
                return False
            self.unify(r, subst_type_avoiding(self.resolve(f.body), f.binder, y))
            return True
        if isinstance(f, TVar) and f.name.startswith("?"):
            return False
        raise _Fail(f"INST on non-quantified {print_type(f)}")

    def propagate(self) -> None:
        progress = True
        while progress and self.deferred:
            progress = False
            todo, self.deferred = self.deferred, []
            for goal in todo:
                if goal[0] == "inst":
                    if self.inst(goal[1], goal[2], goal[3]):
                        progress = True
                    else:
                        self.deferred.append(goal)
                else:
                    before = len(self.deferred)
                    self.unify(goal[1], goal[2])
                    progress = progress or len(self.deferred) == before

    def choices(self) -> list["_Solver"]:
        """Branch on the first stuck goal."""
        goal = self.deferred[0]
        if goal[0] == "inst":
            f, y, r = self.head(goal[1]), goal[2], self.resolve(goal[3])
            if self.metas(r):
                # commit the result's unknowns first
                nxt = self.copy()
                for m in sorted(nxt.metas(r)):
                    nxt.s[m] = nxt.rigid()
                return [nxt]
            out = []
            if isinstance(f, Forall):
                # body[y/binder] = r: pick which occurrences of y came from binder
                for cand in _occurrence_variants(r, y, f.binder):
                    nxt = self.copy()
                    nxt.deferred = nxt.deferred[1:]
                    try:
                        nxt.unify(f.body, cand)
                    except _Fail:
                        continue
                    nxt.deferred.append(("inst", f, y, r))
                    out.append(nxt)
            else:
                z = self.rigid("Z").name
                for cand in _occurrence_variants(r, y, z):
                    nxt = self.copy()
                    nxt.avoid.add(z)
                    nxt.s[f.name] = Forall(z, cand)
                    out.append(nxt)
            return out
        nxt = self.copy()
        for m in sorted(nxt.metas(goal[1]) | nxt.metas(goal[2])):
            nxt.s[m] = nxt.rigid()
        return [nxt]


def _reconstruct_binders(
    env: dict[str, Type], t: Term, a: Type, given: dict[str, Type]
) -> Iterator[dict[str, Type]]:
    """Candidate binder annotations, most constrained first."""
    names = set(term_type_vars(t))
    for b in list(env.values()) + list(given.values()) + [a]:
        names |= all_type_names(b)
    sv = _Solver(names)
    binders: dict[str, Type] = dict(given)

    def synth(u: Term, gamma: dict[str, Type]) -> Type:
        if isinstance(u, Var):
            if u.name in gamma:
                return gamma[u.name]
            raise _Fail(f"unbound assumption variable {u.name}")
        if isinstance(u, Abs):
            if u.binder not in binders:
                binders[u.binder] = sv.meta()
            body = synth(u.body, {**gamma, u.binder: binders[u.binder]})
            return Arrow(binders[u.binder], body)
        if isinstance(u, App):
            f = synth(u.fun, gamma)
            x = synth(u.arg, gamma)
            r = sv.meta()
            sv.unify(f, Arrow(x, r))
            return r
        if isinstance(u, Inst):
            f = synth(u.fun, gamma)
            r = sv.meta()
            sv.deferred.append(("inst", f, u.tyvar, r))
            return r
        return Forall(u.binder, synth(u.body, gamma))

    sv.unify(synth(t, dict(env)), a)
    stack = [sv]
    produced = 0
    while stack and produced < _MAX_BRANCHES:
        cur = stack.pop()
        try:
            cur.propagate()
        except _Fail:
            continue
        if cur.deferred:
            try:
                stack.extend(reversed(cur.choices()))
            except _Fail:
                pass
            continue
        produced += 1
        out = {}
        for x, b in binders.items():
            for m in sorted(cur.metas(b)):
                cur.s[m] = cur.rigid()
            out[x] = cur.resolve(b)
        yield out


# --------------------------------------------------------------------------
# public API


def _derivations(
    env: dict[str, Type], t: Term, a: Type, binders: dict[str, Type] | None
) -> Iterator[CheckResult]:
    given = dict(binders or {})
    needed = {u.binder for u in subterms(t) if isinstance(u, Abs)}
    if not needed - set(given):
        yield _replay(env, given, t, a)
        return
    last = CheckResult(False, "no binder annotation reconstructs a derivation")
    try:
        for cand in _reconstruct_binders(env, t, a, given):
            res = _replay(env, cand, t, a)
            if res:
                yield res
            else:
                last = res
    except _Fail as e:
        last = CheckResult(False, str(e))
    yield last


def check_typing(
    env: dict[str, Type], t: Term, a: Type, binders: dict[str, Type] | None = None
) -> CheckResult:
    """Is ``env |- t : a`` derivable with VAR, ABS, APP, GEN and INST?

    ``binders`` may fix the types of lambda-bound names; missing ones are
    reconstructed.  The result is truthy iff a derivation was replayed.
    """
    return next(_derivations(env, t, a, binders))


def synthesize(env: dict[str, Type], binders: dict[str, Type], t: Term) -> CheckResult:
    """Replay the rules with every assumption typed; ``derived`` holds the type."""
    return _replay(env, binders, t, None)


def redundancies(t: Term, result: CheckResult) -> list[str]:
    """Instantiation and generalisation nodes whose quantifier is vacuous."""
    out = []
    for path, ty in sorted(result.induced.items()):
        node = _node(t, path)
        if isinstance(node, Inst):
            assert isinstance(ty, Forall)
            if ty.binder not in free_type_vars(ty.body):
                out.append(f"{node}: {ty.binder} not free in {print_type(ty.body)}")
        elif node.binder not in free_type_vars(ty):
            out.append(f"{node}: {node.binder} not free in {print_type(ty)}")
    return out


def check_nonredundant(
    env: dict[str, Type], t: Term, a: Type, binders: dict[str, Type] | None = None,
    occurrences: set[Path] | None = None,
) -> bool:
    """True iff some derivation of the typing uses no vacuous quantifier.

    Without ``binders`` the derivations over all reconstructed binder types are
    tried.  ``occurrences`` restricts the condition to the given node paths.
    Raises NotTypable when the typing does not check.
    """
    typable = False
    reason = ""
    for res in _derivations(env, t, a, binders):
        if not res:
            reason = res.reason
            continue
        typable = True
        if occurrences is not None:
            res.induced = {p: ty for p, ty in res.induced.items() if p in occurrences}
        if not redundancies(t, res):
            return True
    if not typable:
        raise NotTypable(reason)
    return False


def poly_paths(t: Term) -> list[Path]:
    """Paths of Inst and Gen nodes in post-order, left to right."""
    out: list[Path] = []

    def walk(u: Term, path: Path) -> None:
        if isinstance(u, App):
            walk(u.fun, path + (0,))
            walk(u.arg, path + (1,))
        elif isinstance(u, (Abs, Gen)):
            walk(u.body, path + (0,))
        elif isinstance(u, Inst):
            walk(u.fun, path + (0,))
        if isinstance(u, (Inst, Gen)):
            out.append(path)

    walk(t, ())
    return out


__all__ = [
    "CheckResult", "NotTypable", "check_typing", "synthesize", "check_nonredundant",
    "redundancies", "poly_paths",
]
