"""Saturation of occurrence constraints over a multisystem.

Equalities live in a union-find over scheme expressions, closed under
decomposition of arrows and quantifiers, substitution congruence and two
derived laws.  Occurrence facts are attached to equivalence classes and
closed under the occurrence axioms:

  A1  Occ(X, s -> t) <-> Occ(X, s) or Occ(X, t)
  A2  Occ(Y, forall X. s) <-> Occ(Y, s)              (Y != X)
  A3  not Occ(X, forall X. s)
  A4  not Occ(X, s[Y/X])                             (X != Y)
  A5  Occ(X, s) <-> Occ(X, s[Z/Y])                   (X != Y, Z != X)
  A6  Occ(X, s) -> Occ(Y, s[Y/X])
  A7  s[Y/X] = s[Z/X] and Occ(X, s) -> Y = Z

Derived laws (sound for adequate values):
  vacuous-subst   not Occ(B, s) -> s[A/B] = s
  rename-chain    not Occ(A, s) -> s[A/B][C/A] = s[C/B]
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..schemes import (
    Equation, SArrow, Scheme, SForall, SVar, normalise_pending, print_scheme, substitute,
)
from .system import OccAtom

MAX_EXPRESSIONS = 4000
MAX_PENDING = 3


class _Refuted(Exception):
    pass


@dataclass
class Saturation:
    consistent: bool
    reason: str = ""
    trace: list[str] = field(default_factory=list)
    atoms: list[OccAtom] = field(default_factory=list)
    equalities: list[tuple[Scheme, Scheme]] = field(default_factory=list)
    capped: bool = False

    def __bool__(self) -> bool:
        return self.consistent


class _Closure:
    def __init__(self) -> None:
        self.exprs: list[Scheme] = []
        self.index: dict[Scheme, int] = {}
        self.parent: list[int] = []
        self.members: dict[int, list[int]] = {}
        self.facts: dict[int, dict[str, bool]] = {}
        self.trace: list[str] = []
        self.changed = False
        self.capped = False
        self.merges: list[tuple[Scheme, Scheme]] = []

    # ---- expressions and classes

    def add(self, e: Scheme) -> int | None:
        if e in self.index:
            return self.index[e]
        if isinstance(e, SVar) and len(e.pending) > MAX_PENDING:
            self.capped = True
            return None
        if len(self.exprs) >= MAX_EXPRESSIONS:
            self.capped = True
            return None
        # parts first, so a compound is only registered when all parts are
        if isinstance(e, SArrow):
            parts = [e.left, e.right]
        elif isinstance(e, SForall):
            parts = [e.body]
        else:
            parts = [SVar(e.var, e.pending[:-1])] if e.pending else []
        for p in parts:
            if self.add(p) is None:
                return None
        i = len(self.exprs)
        self.exprs.append(e)
        self.index[e] = i
        self.parent.append(i)
        self.members[i] = [i]
        self.facts[i] = {}
        self.changed = True
        return i

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def cls(self, e: Scheme) -> int | None:
        i = self.index.get(e)
        return None if i is None else self.find(i)

    def same(self, a: Scheme, b: Scheme) -> bool:
        ca, cb = self.cls(a), self.cls(b)
        return ca is not None and ca == cb

    def union(self, a: Scheme, b: Scheme, why: str) -> None:
        ia, ib = self.add(a), self.add(b)
        if ia is None or ib is None:
            return
        ra, rb = self.find(ia), self.find(ib)
        if ra == rb:
            return
        if len(self.members[ra]) < len(self.members[rb]):
            ra, rb = rb, ra
        self.trace.append(f"{why}: {print_scheme(a)} = {print_scheme(b)}")
        self.merges.append((a, b))
        self.parent[rb] = ra
        self.members[ra].extend(self.members.pop(rb))
        moved = self.facts.pop(rb)
        for x, val in moved.items():
            self._record(ra, x, val, f"equality {print_scheme(a)} = {print_scheme(b)}")
        self.changed = True

    # ---- occurrence facts

    def get(self, e: Scheme, x: str) -> bool | None:
        c = self.cls(e)
        return None if c is None else self.facts[c].get(x)

    def _record(self, c: int, x: str, val: bool, why: str) -> None:
        old = self.facts[c].get(x)
        if old is None:
            self.facts[c][x] = val
            self.changed = True
            return
        if old != val:
            e = self.exprs[c]
            self.trace.append(
                f"{why}: Occ({x}, {print_scheme(e)}) and ¬Occ({x}, {print_scheme(e)}), a contradiction"
            )
            raise _Refuted(f"{why}: Occ({x}, {print_scheme(e)}) and ¬Occ({x}, {print_scheme(e)})")

    def set(self, e: Scheme, x: str, val: bool, why: str) -> None:
        i = self.add(e)
        if i is None:
            return
        c = self.find(i)
        if self.facts[c].get(x) == val:
            return
        sign = "" if val else "¬"
        self.trace.append(f"{why}: {sign}Occ({x}, {print_scheme(e)})")
        self._record(c, x, val, why)

    def known(self, e: Scheme) -> dict[str, bool]:
        c = self.cls(e)
        return {} if c is None else dict(self.facts[c])


def _base(e: SVar) -> SVar:
    return SVar(e.var, e.pending[:-1])


def _apply(cl: _Closure) -> None:
    """One sweep of every rule over a snapshot of the expressions."""
    exprs = list(cl.exprs)

    # arrow and quantifier decomposition, and upward congruence for arrows
    by_class: dict[int, list[Scheme]] = {}
    for e in exprs:
        if not isinstance(e, SVar):
            by_class.setdefault(cl.cls(e), []).append(e)
    for group in by_class.values():
        arrows = [e for e in group if isinstance(e, SArrow)]
        foralls = [e for e in group if isinstance(e, SForall)]
        for a in arrows[1:]:
            cl.union(arrows[0].left, a.left, "Arr")
            cl.union(arrows[0].right, a.right, "Arr")
        for a in foralls[1:]:
            f = foralls[0]
            if f.binder == a.binder:
                cl.union(f.body, a.body, "Quant")
            else:
                cl.union(f.body, substitute(a.body, f.binder, a.binder), "Quant")
                cl.union(a.body, substitute(f.body, a.binder, f.binder), "Quant")
        if arrows and foralls:
            raise _Refuted(f"clash: {print_scheme(arrows[0])} = {print_scheme(foralls[0])}")
    seen: dict[tuple, Scheme] = {}
    for e in exprs:
        if isinstance(e, SArrow):
            key = (cl.cls(e.left), cl.cls(e.right))
            if key in seen:
                cl.union(seen[key], e, "congruence")
            else:
                seen[key] = e

    # substitution congruence: s = t implies s[A/B] = t[A/B]
    for e in exprs:
        if isinstance(e, SVar) and e.pending:
            b = _base(e)
            to, frm = e.pending[-1]
            c = cl.cls(b)
            if c is None:
                continue
            for j in list(cl.members[c]):
                other = cl.exprs[j]
                if other == b:
                    continue
                cl.union(e, substitute(other, to, frm), "subst")

    # occurrence axioms
    for e in exprs:
        if isinstance(e, SArrow):
            for x in set(cl.known(e)) | set(cl.known(e.left)) | set(cl.known(e.right)):
                whole, l, r = cl.get(e, x), cl.get(e.left, x), cl.get(e.right, x)
                if whole is False:
                    cl.set(e.left, x, False, "A1")
                    cl.set(e.right, x, False, "A1")
                if l or r:
                    cl.set(e, x, True, "A1")
                if l is False and r is False:
                    cl.set(e, x, False, "A1")
                if whole and l is False:
                    cl.set(e.right, x, True, "A1")
                if whole and r is False:
                    cl.set(e.left, x, True, "A1")
        elif isinstance(e, SForall):
            cl.set(e, e.binder, False, "A3")
            for x in set(cl.known(e)) | set(cl.known(e.body)):
                if x == e.binder:
                    continue
                v = cl.get(e, x)
                if v is not None:
                    cl.set(e.body, x, v, "A2")
                v = cl.get(e.body, x)
                if v is not None:
                    cl.set(e, x, v, "A2")
        elif e.pending:
            b = _base(e)
            to, frm = e.pending[-1]
            cl.set(e, frm, False, "A4")
            for x in set(cl.known(e)) | set(cl.known(b)):
                if x in (frm, to):
                    continue
                v = cl.get(b, x)
                if v is not None:
                    cl.set(e, x, v, "A5")
                v = cl.get(e, x)
                if v is not None:
                    cl.set(b, x, v, "A5")
            if cl.get(b, frm):
                cl.set(e, to, True, "A6")
            if cl.get(b, to):
                cl.set(e, to, True, "free-kept")
            if cl.get(e, to) is False:
                cl.set(b, frm, False, "A6")
                cl.set(b, to, False, "free-kept")
            if cl.get(b, frm) is False:
                cl.union(e, b, "vacuous-subst")
            if len(e.pending) >= 2:
                (a1, b1), (c1, a2) = e.pending[-2], e.pending[-1]
                sigma = SVar(e.var, e.pending[:-2])
                if a1 == a2 and cl.get(sigma, a1) is False:
                    target = SVar(e.var, normalise_pending(e.pending[:-2] + ((c1, b1),)))
                    cl.union(e, target, "rename-chain")

    # A7: injectivity of a substitution on a variable that occurs
    groups: dict[tuple, list[SVar]] = {}
    for e in cl.exprs:
        if isinstance(e, SVar) and e.pending:
            b = _base(e)
            key = (cl.cls(b), e.pending[-1][1], cl.cls(e))
            groups.setdefault(key, []).append(e)
    for (_, frm, _), es in groups.items():
        tos = sorted({e.pending[-1][0] for e in es})
        if len(tos) < 2:
            continue
        b = _base(es[0])
        if cl.get(b, frm):
            e1 = next(e for e in es if e.pending[-1][0] == tos[0])
            e2 = next(e for e in es if e.pending[-1][0] == tos[1])
            msg = (
                f"A7: {print_scheme(e1)} = {print_scheme(e2)} and Occ({frm}, {print_scheme(b)}) "
                f"give {tos[0]} = {tos[1]}, a contradiction"
            )
            cl.trace.append(msg)
            raise _Refuted(msg)


def occ_saturate(cs: list[OccAtom], equations: list[Equation], max_rounds: int = 64) -> Saturation:
    """Close constraints and equations; refute on a contradiction.

    ``equations`` should be sound equalities (the initial multisystem).
    """
    cl = _Closure()
    try:
        for e in equations:
            for s in e:
                cl.add(s)
            for s in e[1:]:
                cl.union(e[0], s, "equation")
        for atom in cs:
            cl.set(atom.scheme, atom.var, atom.positive, "constraint")
        for _ in range(max_rounds):
            cl.changed = False
            _apply(cl)
            if not cl.changed:
                break
        else:
            cl.capped = True
    except _Refuted as r:
        return Saturation(False, str(r), cl.trace, capped=cl.capped)
    atoms = []
    for i, e in enumerate(cl.exprs):
        for x, v in sorted(cl.facts.get(cl.find(i), {}).items()):
            atoms.append(OccAtom(x, e, v))
    return Saturation(True, "", cl.trace, atoms, list(cl.merges), cl.capped)


__all__ = ["Saturation", "occ_saturate", "MAX_EXPRESSIONS", "MAX_PENDING"]
