"""Bounded witness search for (non-)redundant typings.

Every typing of a term has the shape of its two-variable typing with each
terminal group replaced by some type; by structure irrelevance the group
values can be taken as arrow chains ``V1 -> ... -> Vn`` of variables (the
minimal form).  For fixed group sizes the unknowns are therefore the labels of
finitely many *slots*: each slot holds either one of the quantifiers that
encloses it in its variable's type or a free variable from the adequate set
(the term's type variables, the fresh variables, and ``⋆``).

Typing rules become constraints over slot labels:

* APP equates the leaves of the function's domain and the argument type;
* GEN forbids its variable as a label of the body's free assumptions;
* non-redundancy asks that some leaf of the instantiated (generalised) body
  evaluates to the quantified variable.

Group sizes are enumerated by ascending total, each at most ``m * n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterator, Union

from ..bullet import BulletAnalysis, analyse_bullet
from ..checker import Path, check_nonredundant, check_typing
from ..schemes import SArrow, Scheme, SchemeVar, SForall, SVar
from ..simple import Untypable
from ..syntax import (
    FILL, Abs, App, Arrow, Forall, Gen, Inst, Term, TVar, Type, Typing, Var,
    erase_poly, free_type_vars, free_vars, free_vars_ordered, fresh_name,
    subst_type_avoiding, subterms, term_type_vars,
)
from .system import NRSystem, Mode, associated_multisystem_nr, selected

# --------------------------------------------------------------------------
# slot types


@dataclass(frozen=True)
class Leaf:
    sid: int
    # renamings applied to the label, in order: value ``frm`` becomes ``to``
    ops: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class SArr:
    left: "SType"
    right: "SType"


@dataclass(frozen=True)
class SAll:
    bid: str
    body: "SType"


SType = Union[Leaf, SArr, SAll]


@dataclass(frozen=True)
class Slot:
    sid: int
    owner: str
    group: SchemeVar
    leaf: int
    place: int
    scope: tuple[str, ...]  # enclosing quantifier ids, innermost first

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.owner, self.leaf, self.place)


def _is_id(v: str) -> bool:
    return v.startswith("#")


def _map_ops(t: SType, op: tuple[str, str]) -> SType:
    if isinstance(t, Leaf):
        return Leaf(t.sid, t.ops + (op,))
    if isinstance(t, SArr):
        return SArr(_map_ops(t.left, op), _map_ops(t.right, op))
    return SAll(t.bid, _map_ops(t.body, op))


def _leaves(t: SType) -> Iterator[Leaf]:
    if isinstance(t, Leaf):
        yield t
    elif isinstance(t, SArr):
        yield from _leaves(t.left)
        yield from _leaves(t.right)
    else:
        yield from _leaves(t.body)


def evaluate(leaf: Leaf, labels: dict[int, str]) -> str:
    v = labels[leaf.sid]
    for frm, to in leaf.ops:
        if v == frm:
            v = to
    return v


# --------------------------------------------------------------------------
# constraints


@dataclass(frozen=True)
class Equal:
    a: Leaf
    b: Leaf
    corr: tuple[tuple[str, str], ...]

    @property
    def slots(self) -> set[int]:
        return {self.a.sid, self.b.sid}

    def holds(self, labels: dict[int, str]) -> bool:
        va, vb = evaluate(self.a, labels), evaluate(self.b, labels)
        return dict(self.corr).get(va, va) == vb


@dataclass(frozen=True)
class Occurs:
    """Some leaf evaluates to ``target``; ``occ`` is the occurrence id."""

    leaves: tuple[Leaf, ...]
    target: str
    occ: int

    @property
    def slots(self) -> set[int]:
        return {lf.sid for lf in self.leaves}

    def holds(self, labels: dict[int, str]) -> bool:
        return any(evaluate(lf, labels) == self.target for lf in self.leaves)


class ShapeError(RuntimeError):
    """The typing skeleton does not fit the term (an internal invariant)."""


# --------------------------------------------------------------------------
# skeletons


def _skeleton_fn(an: BulletAnalysis):
    assert an.minimised is not None
    heads = {e.rep: e.head for e in an.minimised.equations if e.head is not None}
    rep_of = an.minimised.rep_of

    def sk(v: SchemeVar):
        v = rep_of.get(v, v)
        h = heads.get(v)
        return ("leaf", v) if h is None else conv(h)

    def conv(s: Scheme):
        if isinstance(s, SVar):
            return sk(s.var)
        if isinstance(s, SArrow):
            return ("arr", conv(s.left), conv(s.right))
        return ("all", conv(s.body))

    return sk


def _skeleton_groups(sk) -> list[SchemeVar]:
    out: list[SchemeVar] = []

    def walk(s) -> None:
        if s[0] == "leaf":
            if s[1] not in out:
                out.append(s[1])
        elif s[0] == "arr":
            walk(s[1])
            walk(s[2])
        else:
            walk(s[1])

    walk(sk)
    return out


# --------------------------------------------------------------------------
# one instance: fixed group sizes


class Instance:
    """Templates, synthesized types and constraints for fixed group sizes."""

    def __init__(self, sys: NRSystem, analysis: BulletAnalysis, sizes: dict[SchemeVar, int],
                 mode: Mode = "all"):
        self.sys = sys
        self.term = sys.term
        self.analysis = analysis
        self.sizes = dict(sizes)
        self.mode = mode
        self.slots: list[Slot] = []
        self.templates: dict[str, SType] = {}
        self.equal: list[Equal] = []
        self.occurs: list[Occurs] = []
        self.banned: dict[int, set[str]] = {}
        self.types: dict[Path, SType] = {}
        self.inst_fun: dict[Path, SAll] = {}
        self.result: SType | None = None
        self._uses = 0
        sk = _skeleton_fn(analysis)
        t = self.term
        self.names = list(free_vars_ordered(t)) + [
            u.binder for u in subterms(t) if isinstance(u, Abs)
        ]
        self.names = list(dict.fromkeys(self.names))
        self.skeletons = {x: sk(analysis.tagging[x]) for x in self.names}
        for x in self.names:
            self._counter = 0
            self._leaf = 0
            self.templates[x] = self._expand(self.skeletons[x], x, ())
        self.occ_of_path = {o.path: o for o in sys.vtag.occurrences}
        self.result = self._synth(t, ())
        self.equal = list(dict.fromkeys(self.equal))

    # ---- templates

    def _expand(self, s, owner: str, scope: tuple[str, ...]) -> SType:
        if s[0] == "leaf":
            g = s[1]
            n = self.sizes.get(g, 1)
            leaf = self._leaf
            self._leaf += 1
            chain: list[Leaf] = []
            for k in range(n):
                slot = Slot(len(self.slots), owner, g, leaf, k, scope)
                self.slots.append(slot)
                chain.append(Leaf(slot.sid))
            out: SType = chain[-1]
            for lf in reversed(chain[:-1]):
                out = SArr(lf, out)
            return out
        if s[0] == "arr":
            return SArr(self._expand(s[1], owner, scope), self._expand(s[2], owner, scope))
        bid = f"#{owner}/{self._counter}"
        self._counter += 1
        return SAll(bid, self._expand(s[1], owner, (bid,) + scope))

    def _use(self, x: str) -> SType:
        """A copy of x's template whose quantifier ids are private to this use."""
        self._uses += 1
        tag = f"@{self._uses}"

        def walk(t: SType, ren: tuple[tuple[str, str], ...]) -> SType:
            if isinstance(t, Leaf):
                return Leaf(t.sid, t.ops + ren)
            if isinstance(t, SArr):
                return SArr(walk(t.left, ren), walk(t.right, ren))
            return SAll(t.bid + tag, walk(t.body, ren + ((t.bid, t.bid + tag),)))

        return walk(self.templates[x], ())

    # ---- synthesis

    def _equate(self, a: SType, b: SType, corr: tuple[tuple[str, str], ...]) -> None:
        if isinstance(a, Leaf) and isinstance(b, Leaf):
            self.equal.append(Equal(a, b, corr))
        elif isinstance(a, SArr) and isinstance(b, SArr):
            self._equate(a.left, b.left, corr)
            self._equate(a.right, b.right, corr)
        elif isinstance(a, SAll) and isinstance(b, SAll):
            self._equate(a.body, b.body, corr + ((a.bid, b.bid),))
        else:
            raise ShapeError("argument and domain shapes differ")

    def _synth(self, u: Term, path: Path) -> SType:
        if isinstance(u, Var):
            out = self._use(u.name)
        elif isinstance(u, Abs):
            out = SArr(self._use(u.binder), self._synth(u.body, path + (0,)))
        elif isinstance(u, App):
            f = self._synth(u.fun, path + (0,))
            a = self._synth(u.arg, path + (1,))
            if not isinstance(f, SArr):
                raise ShapeError(f"{u.fun} is not a function")
            self._equate(f.left, a, ())
            out = f.right
        elif isinstance(u, Inst):
            f = self._synth(u.fun, path + (0,))
            if not isinstance(f, SAll):
                raise ShapeError(f"{u.fun} is not quantified")
            self.inst_fun[path] = f
            occ = self.occ_of_path[path]
            if selected(self.mode, occ.id):
                self.occurs.append(Occurs(tuple(_leaves(f.body)), f.bid, occ.id))
            out = _map_ops(f.body, (f.bid, u.tyvar))
        else:
            occ = self.occ_of_path[path]
            for z in free_vars(u.body):
                for s in self.slots:
                    if s.owner == z:
                        self.banned.setdefault(s.sid, set()).add(u.binder)
            body = self._synth(u.body, path + (0,))
            if selected(self.mode, occ.id):
                self.occurs.append(Occurs(tuple(_leaves(body)), u.binder, occ.id))
            gid = "#gen" + "".join(map(str, path)) + "."
            out = SAll(gid, _map_ops(body, (u.binder, gid)))
        self.types[path] = out
        return out

    # ---- labels

    def free_order(self) -> list[str]:
        # fresh tagging variables stay out: they name binders, and a free use
        # would make the pending renamings of the multisystem capture
        names = list(dict.fromkeys(term_type_vars_ordered(self.term)))
        # without positive constraints the plainest typing fills every place with ⋆
        return [FILL] + names if self.mode == "none" else names + [FILL]

    def constrained(self) -> set[int]:
        out: set[int] = set()
        for c in self.equal:
            out |= c.slots
        for c in self.occurs:
            out |= c.slots
        return out

    def holds(self, labels: dict[int, str]) -> bool:
        if any(labels[s] in self.banned.get(s, ()) for s in labels):
            return False
        return all(c.holds(labels) for c in self.equal) and all(c.holds(labels) for c in self.occurs)

    def solve(self) -> Iterator[dict[int, str]]:
        """Label assignments satisfying every constraint, in enumeration order."""
        free = self.free_order()
        cons = self.constrained()
        order = sorted(cons)
        position = {sid: i for i, sid in enumerate(order)}
        checks: dict[int, list] = {}
        for c in [*self.equal, *self.occurs]:
            last = max(c.slots, key=lambda s: position[s])
            checks.setdefault(last, []).append(c)
        domains = {}
        for sid in order:
            slot = self.slots[sid]
            ban = self.banned.get(sid, set())
            domains[sid] = list(slot.scope) + [v for v in free if v not in ban]
        labels = {s.sid: FILL for s in self.slots if s.sid not in cons}

        def go(i: int) -> Iterator[dict[int, str]]:
            if i == len(order):
                yield dict(labels)
                return
            sid = order[i]
            for v in domains[sid]:
                labels[sid] = v
                if all(c.holds(labels) for c in checks.get(sid, ())):
                    yield from go(i + 1)
            del labels[sid]

        yield from go(0)

    # ---- reading off types

    def free_names(self, t: SType, labels: dict[int, str], bound: frozenset = frozenset()) -> set[str]:
        if isinstance(t, Leaf):
            v = evaluate(t, labels)
            return set() if v in bound else {v}
        if isinstance(t, SArr):
            return self.free_names(t.left, labels, bound) | self.free_names(t.right, labels, bound)
        return self.free_names(t.body, labels, bound | {t.bid})

    def to_type(self, t: SType, labels: dict[int, str]) -> Type:
        """Concrete type; quantifiers are named X1, X2, ... (a generalised
        variable keeps its own name when it is free to do so)."""
        avoid = {v for v in self.free_names(t, labels) if not _is_id(v)}
        avoid |= set(term_type_vars(self.term))
        gen_names = {
            "#gen" + "".join(map(str, p)) + ".": self._node(p).binder
            for p in self.types if isinstance(self._node(p), Gen)
        }

        def walk(t: SType, names: dict[str, str], used: set[str]) -> Type:
            if isinstance(t, Leaf):
                v = evaluate(t, labels)
                if v in names:
                    return TVar(names[v])
                if _is_id(v):
                    raise ShapeError(f"dangling quantifier {v}")
                return TVar(v)
            if isinstance(t, SArr):
                return Arrow(walk(t.left, names, used), walk(t.right, names, used))
            want = gen_names.get(t.bid)
            free_here = {v for v in self.free_names(t, labels) if not _is_id(v)}
            if want is None or want in used or want in free_here:
                want = fresh_name(avoid | used, "X")
            return Forall(want, walk(t.body, {**names, t.bid: want}, used | {want}))

        return walk(t, {}, set())

    def _node(self, path: Path) -> Term:
        u = self.term
        for i in path:
            if isinstance(u, App):
                u = u.fun if i == 0 else u.arg
            elif isinstance(u, Inst):
                u = u.fun
            else:
                u = u.body
        return u

    def typing(self, labels: dict[int, str]) -> Typing:
        fv = set(free_vars(self.term))
        env = {x: self.to_type(self.templates[x], labels) for x in self.names if x in fv}
        binders = {x: self.to_type(self.templates[x], labels) for x in self.names if x not in fv}
        assert self.result is not None
        return Typing(env, self.to_type(self.result, labels), binders)

    # ---- occurrence matrix

    def scheme_values(self, labels: dict[int, str]) -> dict[SchemeVar, set[str]]:
        """Free type variables of the value of every scheme variable."""
        tg = self.sys.tagging
        out: dict[SchemeVar, set[str]] = {}
        for x in self.names:
            out[tg[x]] = self.free_names(self.templates[x], labels)
        for path, st in self.types.items():
            u = self._node(path)
            if not isinstance(u, Var):
                out.setdefault(tg[u], self.free_names(st, labels))
        for path, f in self.inst_fun.items():
            occ = self.occ_of_path[path]
            u = self._node(path)
            body = self.free_names(f.body, labels | {})
            names = body | ({occ.fresh} if any(
                evaluate(lf, labels) == f.bid for lf in _leaves(f.body)) else set())
            out[SchemeVar(tg[u.fun].index, occ.fresh)] = {v for v in names if v != f.bid}
        return out

    def matrix(self, labels: dict[int, str]) -> dict[tuple[str, SchemeVar], bool]:
        vals = self.scheme_values(labels)
        tvs = sorted(self.sys.type_vars)
        return {(x, a): x in vals.get(a, set()) for a in sorted(self.sys.scheme_vars) for x in tvs}


def term_type_vars_ordered(t: Term) -> list[str]:
    out: list[str] = []
    for u in subterms(t):
        if isinstance(u, Inst) and u.tyvar not in out:
            out.append(u.tyvar)
        elif isinstance(u, Gen) and u.binder not in out:
            out.append(u.binder)
    return out


# --------------------------------------------------------------------------
# witnesses


@dataclass
class Witness:
    instance: Instance
    labels: dict[int, str]
    typing: Typing
    shrunk: list[str] = field(default_factory=list)

    @property
    def sizes(self) -> dict[SchemeVar, int]:
        return dict(self.instance.sizes)

    def group_values(self) -> dict[tuple[str, int], list[str]]:
        """Variable sequence of each terminal leaf, keyed by (owner, leaf)."""
        out: dict[tuple[str, int], list[str]] = {}
        for s in self.instance.slots:
            out.setdefault((s.owner, s.leaf), []).append(self.labels[s.sid])
        return out

    def matrix(self) -> dict[tuple[str, SchemeVar], bool]:
        return self.instance.matrix(self.labels)


def build_instance(sys: NRSystem, analysis: BulletAnalysis, sizes: dict[SchemeVar, int],
                   mode: Mode = "all") -> Instance:
    return Instance(sys, analysis, sizes, mode)


def _without_place(w: Witness, group: SchemeVar, place: int) -> tuple[Instance, dict[int, str]]:
    inst = w.instance
    sizes = dict(inst.sizes)
    sizes[group] = sizes.get(group, 1) - 1
    smaller = Instance(inst.sys, inst.analysis, sizes, inst.mode)
    by_key = {s.key: w.labels[s.sid] for s in inst.slots}
    labels = {}
    for s in smaller.slots:
        owner, leaf, p = s.key
        if s.group == group and p >= place:
            p += 1
        labels[s.sid] = by_key[(owner, leaf, p)]
    return smaller, labels


def essential_places(w: Witness, group: SchemeVar) -> set[int]:
    """Places of ``group`` whose removal changes the occurrence matrix.

    A group of size one keeps its only place, which counts as essential.
    """
    n = w.instance.sizes.get(group, 1)
    if n <= 1:
        return {0}
    base = w.matrix()
    out = set()
    for k in range(n):
        smaller, labels = _without_place(w, group, k)
        if smaller.matrix(labels) != base:
            out.add(k)
    return out


def shrink(w: Witness) -> Witness:
    """Remove non-essential places until every place is essential."""
    changed = True
    while changed:
        changed = False
        for g in sorted(w.instance.sizes):
            if w.instance.sizes[g] <= 1:
                continue
            ess = essential_places(w, g)
            lazy = [k for k in range(w.instance.sizes[g]) if k not in ess]
            if not lazy:
                continue
            smaller, labels = _without_place(w, g, lazy[0])
            if not smaller.holds(labels):
                continue
            w = Witness(smaller, labels, smaller.typing(labels), w.shrunk + [f"{g} place {lazy[0] + 1}"])
            changed = True
            break
    return w


@dataclass
class SearchStats:
    instances: int = 0
    bound: int = 0
    max_size: int = 0


def search_witness(sys: NRSystem, analysis: BulletAnalysis, mode: Mode = "all",
                   bound: int | None = None, stats: SearchStats | None = None) -> Witness | None:
    """First witness in enumeration order (ascending total size), or None."""
    stats = stats if stats is not None else SearchStats()
    bound = bound if bound is not None else sys.search_bound()
    stats.bound = bound
    groups: list[SchemeVar] = []
    sk = _skeleton_fn(analysis)
    for u in list(free_vars_ordered(sys.term)) + [
        u.binder for u in subterms(sys.term) if isinstance(u, Abs)
    ]:
        for g in _skeleton_groups(sk(analysis.tagging[u])):
            if g not in groups:
                groups.append(g)
    base = {g: 1 for g in groups}
    first = Instance(sys, analysis, base, mode)
    stats.instances += 1
    relevant = [g for g in groups if any(
        first.slots[lf.sid].group == g for c in first.occurs for lf in c.leaves)]
    positives = len(first.occurs)
    for extra in range(positives + 1):
        for picks in combinations_with_replacement(range(len(relevant)), extra):
            sizes = dict(base)
            for i in picks:
                sizes[relevant[i]] += 1
            if max(sizes.values(), default=1) > bound:
                continue
            inst = first if extra == 0 else Instance(sys, analysis, sizes, mode)
            if extra:
                stats.instances += 1
            for labels in inst.solve():
                stats.max_size = max(sizes.values(), default=1)
                return Witness(inst, labels, inst.typing(labels))
    return None


# --------------------------------------------------------------------------
# decision


@dataclass
class Decision:
    verdict: bool
    typing: Typing | None = None
    reason: str = ""
    trace: list[str] = field(default_factory=list)
    witness: Witness | None = None
    rules_applied: int = 0
    bound: int = 0
    bound_used: int = 0
    saturation: object = None

    def __bool__(self) -> bool:
        return self.verdict


def _verify(t: Term, w: Witness, mode: Mode, sys: NRSystem) -> None:
    ty = w.typing
    if mode == "none":
        ok = bool(check_typing(ty.env, t, ty.result, ty.binders))
    else:
        paths = None
        if mode != "all":
            paths = {o.path for o in sys.vtag.occurrences if selected(mode, o.id)}
        ok = check_nonredundant(ty.env, t, ty.result, ty.binders, occurrences=paths)
    if not ok:
        raise RuntimeError(f"witness failed verification: {ty}")


def decide_nonredundant(t: Term, mode: Mode = "all") -> Decision:
    """Decide (partial) non-redundant typability and produce a witness."""
    from .occurrence import occ_saturate
    from .system import constraints, reduce_nr

    analysis = analyse_bullet(erase_poly(t))
    if not analysis.typable:
        return Decision(False, reason=f"untypable ({analysis.reason})")
    sys = associated_multisystem_nr(t)
    cs = constraints(sys, mode)
    red = reduce_nr(sys)
    trace = [f"reduce: {line}" for line in red.trace]
    sat = occ_saturate(cs, sys.equations)
    trace += [f"saturate: {line}" for line in sat.trace]
    rules = red.steps + len(sat.trace)
    bound = sys.search_bound()
    if not sat.consistent:
        return Decision(False, reason=sat.reason, trace=trace, rules_applied=rules,
                        bound=bound, saturation=sat)
    stats = SearchStats()
    w = search_witness(sys, analysis, mode, bound, stats)
    if w is None:
        return Decision(False, reason=f"no witness with group sizes up to {bound}", trace=trace,
                        rules_applied=rules, bound=bound, saturation=sat)
    w = shrink(w)
    _verify(t, w, mode, sys)
    trace += [f"search: {stats.instances} candidate size vectors"]
    trace += [f"shrink: removed {s}" for s in w.shrunk]
    used = max(w.instance.sizes.values(), default=1)
    return Decision(True, w.typing, "", trace, w, rules, bound, used, sat)


def evaluate_scheme(values: dict[SchemeVar, Type], s: Scheme) -> Type:
    """Concrete value of a scheme expression under scheme variable values."""
    if isinstance(s, SVar):
        out = values[s.var]
        for to, frm in s.pending:
            out = subst_type_avoiding(out, frm, to)
        return out
    if isinstance(s, SArrow):
        return Arrow(evaluate_scheme(values, s.left), evaluate_scheme(values, s.right))
    return Forall(s.binder, evaluate_scheme(values, s.body))


def concrete_values(w: Witness) -> dict[SchemeVar, Type]:
    """Types of every scheme variable of the multisystem under a witness."""
    inst = w.instance
    tg = inst.sys.tagging
    out: dict[SchemeVar, Type] = {}
    for x in inst.names:
        out[tg[x]] = inst.to_type(inst.templates[x], w.labels)
    for path, st in inst.types.items():
        u = inst._node(path)
        if not isinstance(u, Var):
            out.setdefault(tg[u], inst.to_type(st, w.labels))
    for path, f in inst.inst_fun.items():
        occ = inst.occ_of_path[path]
        u = inst._node(path)
        ty = inst.to_type(f, w.labels)
        assert isinstance(ty, Forall)
        out[SchemeVar(tg[u.fun].index, occ.fresh)] = subst_type_avoiding(ty.body, ty.binder, occ.fresh)
    return out


def occurs_in(x: str, a: Type) -> bool:
    return x in free_type_vars(a)


__all__ = [
    "Slot", "Leaf", "Instance", "Witness", "build_instance", "essential_places", "shrink",
    "search_witness", "SearchStats", "Decision", "decide_nonredundant", "evaluate_scheme",
    "concrete_values", "occurs_in", "ShapeError", "Untypable",
]
