"""Typability and (redundant) type inference through the two-variable subsystem.

The pipeline for a term whose polymorphic nodes all use ``*``:
tag -> associated multisystem -> reduce -> clash check -> minimise ->
digraph -> cycle check -> reconstruct.  ``infer_poly`` erases a Polymorphic
Curry term to that fragment, runs the pipeline and lifts the typing back.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .checker import check_typing
from .schemes import (
    Equation, SArrow, Scheme, SchemeVar, SForall, SVar, length, print_equation,
    print_scheme, scheme_vars,
)
from .simple import Untypable
from .syntax import (
    ATOM, STAR, Abs, App, Arrow, Forall, Gen, Inst, Term, TVar, Type, Typing, Var,
    erase_poly, free_vars_ordered, fresh_name, is_bullet, subterms, term_type_vars,
)


# --------------------------------------------------------------------------
# tagging


@dataclass
class Tagging:
    """Scheme variables for distinct subterms and for assumption-variable names.

    Subterms are identified typographically and assumption variables by name,
    so a free ``x`` and a bound ``x`` share one tag.
    """

    keys: dict[tuple, int]

    @staticmethod
    def key(t: Term | str) -> tuple:
        if isinstance(t, str):
            return ("var", t)
        if isinstance(t, Var):
            return ("var", t.name)
        return ("term", t)

    def __getitem__(self, t: Term | str) -> SchemeVar:
        return SchemeVar(self.keys[self.key(t)])

    def __len__(self) -> int:
        return len(self.keys)

    def items(self) -> list[tuple[str, SchemeVar]]:
        """Printable (subterm or variable, tag) pairs in tag order."""
        out = []
        for k, i in sorted(self.keys.items(), key=lambda kv: kv[1]):
            out.append((k[1] if k[0] == "var" else str(k[1]), SchemeVar(i)))
        return out


def tag(t: Term) -> Tagging:
    """Number non-variable subterms breadth-first from the root, then variables
    in breadth-first order of first appearance (a binder counts as the first
    child of its abstraction)."""
    keys: dict[tuple, int] = {}
    names: list[str] = []
    queue: deque = deque([t])
    while queue:
        u = queue.popleft()
        if isinstance(u, str):
            if u not in names:
                names.append(u)
            continue
        if isinstance(u, Var):
            if u.name not in names:
                names.append(u.name)
            continue
        k = Tagging.key(u)
        if k not in keys:
            keys[k] = len(keys)
        if isinstance(u, App):
            queue.extend([u.fun, u.arg])
        elif isinstance(u, Abs):
            queue.extend([u.binder, u.body])
        elif isinstance(u, Gen):
            queue.append(u.body)
        else:
            queue.append(u.fun)
    for x in names:
        keys[("var", x)] = len(keys)
    return Tagging(keys)


def _distinct_nonvar(t: Term) -> list[Term]:
    seen, out = set(), []
    for u in subterms(t):
        if not isinstance(u, Var) and u not in seen:
            seen.add(u)
            out.append(u)
    return out


def associated_multisystem(t: Term, tagging: Tagging | None = None) -> list[Equation]:
    """One equation per distinct non-variable subterm, in tag order."""
    tagging = tagging or tag(t)
    a = lambda u: SVar(tagging[u])  # noqa: E731
    eqs = []
    for u in sorted(_distinct_nonvar(t), key=lambda u: tagging[u]):
        if isinstance(u, App):
            eqs.append((a(u.fun), SArrow(a(u.arg), a(u))))
        elif isinstance(u, Abs):
            eqs.append((a(u), SArrow(a(u.binder), a(u.body))))
        elif isinstance(u, Inst):
            eqs.append((a(u.fun), SForall(STAR, a(u))))
        else:
            eqs.append((a(u), SForall(STAR, a(u.body))))
    return eqs


# --------------------------------------------------------------------------
# reduction


def _dedupe(e: tuple) -> tuple:
    out = []
    for s in e:
        if s not in out:
            out.append(s)
    return tuple(out)


def termination_bound(ms: list[Equation]) -> int:
    """Sum of 4**length over every scheme in the system."""
    return sum(4 ** length(s) for e in ms for s in e)


def detect_clash(ms: list[Equation]) -> Equation | None:
    for e in ms:
        if any(isinstance(s, SArrow) for s in e) and any(isinstance(s, SForall) for s in e):
            return e
    return None


def _find_join(ms: list[Equation]) -> tuple[int, int, int] | None:
    for a in range(len(ms)):
        for b in range(a + 1, len(ms)):
            for i, s in enumerate(ms[a]):
                if s in ms[b]:
                    return a, b, i
    return None


def _find_pair(ms: list[Equation], kind: type) -> tuple[int, int, int] | None:
    for k, e in enumerate(ms):
        idx = [i for i, s in enumerate(e) if isinstance(s, kind)]
        if len(idx) >= 2:
            return k, idx[1], idx[0]
    return None


@dataclass
class Reduction:
    system: list[Equation]
    trace: list[str] = field(default_factory=list)
    steps: int = 0
    clash: Equation | None = None


def _step(ms: list[Equation], trace: list[str]) -> bool:
    """Apply one rule (joins first); False at a fixed point."""
    hit = _find_join(ms)
    if hit is not None:
        a, b, i = hit
        e, e2 = ms[a], ms[b]
        merged = _dedupe(e[:i] + e[i + 1:] + e2)
        trace.append(f"Join: {print_equation(e)} & {print_equation(e2)} => {print_equation(merged)}")
        ms[a] = merged
        del ms[b]
        return True
    for kind in (SArrow, SForall):
        hit = _find_pair(ms, kind)
        if hit is None:
            continue
        k, i, j = hit
        e = ms[k]
        rest = e[:i] + e[i + 1:]
        if kind is SArrow:
            new = [(e[i].left, e[j].left), (e[i].right, e[j].right)]
            rule = "Arr"
        else:
            new = [(e[i].body, e[j].body)]
            rule = "Quant"
        new = [_dedupe(n) for n in new]
        trace.append(
            f"{rule}: {print_equation(e)} => "
            + "; ".join(print_equation(n) for n in [rest] + new if len(n) >= 2)
        )
        if len(rest) >= 2:
            ms[k] = rest
        else:
            del ms[k]
        ms.extend(n for n in new if len(n) >= 2)
        return True
    return False


def reduce(ms: list[Equation], stop_on_clash: bool = False) -> Reduction:
    """Rewrite to a fixed point of Join, Arr and Quant.

    Joins are applied exhaustively (earliest pair first) before each Arr, and
    Arr before Quant.  Arr and Quant drop the later of the two matching schemes.
    """
    work = [_dedupe(e) for e in ms]
    work = [e for e in work if len(e) >= 2]
    red = Reduction(work)
    while True:
        if stop_on_clash:
            red.clash = detect_clash(work)
            if red.clash is not None:
                return red
        if not _step(work, red.trace):
            break
        red.steps += 1
    red.clash = detect_clash(work)
    return red


def is_irreducible(ms: list[Equation]) -> bool:
    return _step(list(ms), []) is False


# --------------------------------------------------------------------------
# minimisation and digraph


@dataclass(frozen=True)
class MinEquation:
    rep: SchemeVar
    head: Scheme | None

    def __str__(self) -> str:
        return f"{self.rep} = {print_scheme(self.head)}" if self.head is not None else str(self.rep)


@dataclass
class Minimised:
    equations: list[MinEquation]
    rep_of: dict[SchemeVar, SchemeVar]


def _replace(s: Scheme, ren: dict[SchemeVar, SchemeVar]) -> Scheme:
    if isinstance(s, SVar):
        return SVar(ren.get(s.var, s.var), s.pending)
    if isinstance(s, SArrow):
        return SArrow(_replace(s.left, ren), _replace(s.right, ren))
    return SForall(s.binder, _replace(s.body, ren))


def minimise(ms: list[Equation]) -> Minimised:
    """Collapse each body to its lowest-numbered variable."""
    if not is_irreducible(ms):
        raise ValueError("minimise needs an irreducible multisystem")
    if detect_clash(ms) is not None:
        raise ValueError("minimise needs a clash-free multisystem")
    rep_of: dict[SchemeVar, SchemeVar] = {}
    parts = []
    for e in ms:
        body = [s.var for s in e if isinstance(s, SVar)]
        head = [s for s in e if not isinstance(s, SVar)]
        rep = min(body)
        for v in body:
            rep_of[v] = rep
        parts.append((rep, head[0] if head else None))
    eqs = [MinEquation(rep, _replace(h, rep_of) if h is not None else None) for rep, h in parts]
    return Minimised(eqs, rep_of)


@dataclass
class Digraph:
    vertices: tuple[SchemeVar, ...]
    edges: tuple[tuple[SchemeVar, SchemeVar], ...]

    def successors(self, v: SchemeVar) -> list[SchemeVar]:
        return [b for a, b in self.edges if a == v]

    def to_dot(self) -> str:
        lines = ["digraph G {"]
        lines += [f'  "{v}";' for v in self.vertices]
        lines += [f'  "{a}" -> "{b}";' for a, b in self.edges]
        lines.append("}")
        return "\n".join(lines)


def digraph(m: Minimised) -> Digraph:
    """Edges run from each body representative to the variables of its head."""
    vertices: set[SchemeVar] = set()
    edges: list[tuple[SchemeVar, SchemeVar]] = []
    for e in m.equations:
        vertices.add(e.rep)
        if e.head is not None:
            for v in scheme_vars(e.head):
                vertices.add(v)
                if (e.rep, v) not in edges:
                    edges.append((e.rep, v))
    return Digraph(tuple(sorted(vertices)), tuple(edges))


def find_cycle(g: Digraph) -> list[SchemeVar] | None:
    """A cycle as a vertex list, found by depth-first search, or None."""
    colour: dict[SchemeVar, int] = {}
    for root in g.vertices:
        if colour.get(root):
            continue
        stack = [(root, iter(g.successors(root)))]
        path = [root]
        colour[root] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[v] = 2
                stack.pop()
                path.pop()
            elif colour.get(nxt) == 1:
                return path[path.index(nxt):] + [nxt]
            elif not colour.get(nxt):
                colour[nxt] = 1
                stack.append((nxt, iter(g.successors(nxt))))
                path.append(nxt)
    return None


def has_cycle(g: Digraph) -> bool:
    return find_cycle(g) is not None


def reconstruct(m: Minimised, g: Digraph) -> dict[SchemeVar, Type]:
    """Vertex types: terminals get ``O``, the rest follow their heads."""
    if has_cycle(g):
        raise ValueError("cannot reconstruct types from a cyclic digraph")
    heads = {e.rep: e.head for e in m.equations if e.head is not None}
    memo: dict[SchemeVar, Type] = {}

    def ty(v: SchemeVar) -> Type:
        if v not in memo:
            memo[v] = _eval(heads[v]) if v in heads else TVar(ATOM)
        return memo[v]

    def _eval(s: Scheme) -> Type:
        if isinstance(s, SVar):
            return ty(s.var)
        if isinstance(s, SArrow):
            return Arrow(_eval(s.left), _eval(s.right))
        return Forall(STAR, _eval(s.body))

    for v in g.vertices:
        ty(v)
    return memo


# --------------------------------------------------------------------------
# the pipeline


@dataclass
class BulletAnalysis:
    term: Term
    tagging: Tagging
    system: list[Equation]
    reduction: Reduction
    minimised: Minimised | None = None
    graph: Digraph | None = None
    cycle: list[SchemeVar] | None = None
    types: dict[SchemeVar, Type] | None = None
    typing: Typing | None = None

    @property
    def typable(self) -> bool:
        return self.typing is not None

    @property
    def reason(self) -> str:
        if self.reduction.clash is not None:
            return f"clash: {print_equation(self.reduction.clash)}"
        if self.cycle is not None:
            return "cycle: " + " -> ".join(map(str, self.cycle))
        return ""

    def type_of(self, v: SchemeVar) -> Type:
        """Type of any tag, extended from vertices to whole bodies."""
        assert self.types is not None and self.minimised is not None
        rep = self.minimised.rep_of.get(v, v)
        return self.types.get(rep, TVar(ATOM))


def analyse_bullet(t: Term) -> BulletAnalysis:
    if not is_bullet(t):
        raise ValueError("expected a term whose type nodes all use *")
    tagging = tag(t)
    system = associated_multisystem(t, tagging)
    red = reduce(system, stop_on_clash=True)
    out = BulletAnalysis(t, tagging, system, red)
    if red.clash is not None:
        return out
    out.minimised = minimise(red.system)
    out.graph = digraph(out.minimised)
    out.cycle = find_cycle(out.graph)
    if out.cycle is not None:
        return out
    out.types = reconstruct(out.minimised, out.graph)
    env = {x: out.type_of(tagging[x]) for x in free_vars_ordered(t)}
    binders = {u.binder: out.type_of(tagging[u.binder]) for u in subterms(t) if isinstance(u, Abs)}
    out.typing = Typing(env, out.type_of(tagging[t]), binders)
    return out


def typable_bullet(t: Term) -> bool:
    return analyse_bullet(t).typable


def infer_bullet(t: Term) -> Typing:
    res = analyse_bullet(t)
    if res.typing is None:
        raise Untypable(res.reason, res)
    return res.typing


def _lift_type(a: Type, atom: str, names: list[str], avoid: set[str], depth: int = 0) -> Type:
    if isinstance(a, TVar):
        return TVar(atom) if a.name == ATOM else a
    if isinstance(a, Arrow):
        return Arrow(
            _lift_type(a.left, atom, names, avoid, depth),
            _lift_type(a.right, atom, names, avoid, depth),
        )
    while len(names) <= depth:
        names.append(fresh_name(avoid | set(names), "Z"))
    return Forall(names[depth], _lift_type(a.body, atom, names, avoid, depth + 1))


def lift_to_fat(t: Term, typing: Typing) -> Typing:
    """Rename the ``*`` binders of a typing of ``erase_poly(t)`` so it types ``t``.

    A quantifier at nesting depth d gets the d-th fresh name.  The ground atom
    is renamed when ``t`` itself uses ``O`` as a type variable.
    """
    used = term_type_vars(t)
    atom = ATOM if ATOM not in used else fresh_name(used, "O")
    names: list[str] = []
    avoid = used | {atom}

    def lift(a: Type) -> Type:
        return _lift_type(a, atom, names, avoid)

    lifted = Typing(
        {x: lift(a) for x, a in typing.env.items()},
        lift(typing.result),
        {x: lift(a) for x, a in (typing.binders or {}).items()},
    )
    res = check_typing(lifted.env, t, lifted.result, lifted.binders)
    if not res:
        raise ValueError(f"lifted typing does not check: {res.reason}")
    return lifted


def infer_poly(t: Term) -> Typing:
    """A (possibly redundant) typing of a Polymorphic Curry term."""
    return lift_to_fat(t, infer_bullet(erase_poly(t)))


def poly_typable(t: Term) -> bool:
    try:
        infer_poly(t)
    except Untypable:
        return False
    return True


__all__ = [
    "Tagging", "tag", "associated_multisystem", "reduce", "Reduction", "detect_clash",
    "termination_bound", "is_irreducible", "minimise", "Minimised", "MinEquation",
    "digraph", "Digraph", "find_cycle", "has_cycle", "reconstruct", "analyse_bullet",
    "BulletAnalysis", "typable_bullet", "infer_bullet", "lift_to_fat", "infer_poly",
    "poly_typable",
]
