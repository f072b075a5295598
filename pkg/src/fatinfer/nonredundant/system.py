"""Extended multisystems with pending substitutions, constraints and reduction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..bullet import Tagging, associated_multisystem, reduce as reduce_bullet, tag, termination_bound
from ..checker import Path
from ..schemes import (
    Equation, SArrow, Scheme, SchemeVar, SForall, SVar, is_variant, print_equation,
    print_scheme, scheme_type_vars, scheme_vars, substitute,
)
from ..simple import Untypable
from ..syntax import (
    STAR, Abs, App, Gen, Inst, Term, Var, erase_poly, free_vars, fresh_name, term_type_vars,
)

ERASED = "∘"


# --------------------------------------------------------------------------
# variable tagging


@dataclass(frozen=True)
class Occurrence:
    """One occurrence of ``N X`` or ``/\\X. N`` with its fresh variable."""

    id: int
    fresh: str
    path: Path
    node: Term

    @property
    def kind(self) -> str:
        return "inst" if isinstance(self.node, Inst) else "gen"

    @property
    def tyvar(self) -> str:
        return self.node.tyvar if isinstance(self.node, Inst) else self.node.binder

    def __str__(self) -> str:
        return f"{self.id}  {self.fresh}  {self.kind}  {self.node}"


@dataclass
class VariableTagging:
    occurrences: list[Occurrence]

    def __len__(self) -> int:
        return len(self.occurrences)

    def by_node(self) -> dict[str, str]:
        """Printable ``subterm -> fresh variable`` map (later duplicates win)."""
        return {str(o.node): o.fresh for o in self.occurrences}

    @property
    def fresh_vars(self) -> list[str]:
        return [o.fresh for o in self.occurrences]


def _poly_occurrences(t: Term) -> list[tuple[Path, Term]]:
    out: list[tuple[Path, Term]] = []

    def walk(u: Term, path: Path) -> None:
        if isinstance(u, App):
            walk(u.fun, path + (0,))
            walk(u.arg, path + (1,))
        elif isinstance(u, (Abs, Gen)):
            walk(u.body, path + (0,))
        elif isinstance(u, Inst):
            walk(u.fun, path + (0,))
        if isinstance(u, (Inst, Gen)):
            out.append((path, u))

    walk(t, ())
    return out


def var_tag(t: Term) -> VariableTagging:
    """Fresh ``X1, X2, ...`` per polymorphic occurrence, post-order left to right."""
    avoid = set(term_type_vars(t)) | {ERASED, STAR}
    occs = []
    for i, (path, node) in enumerate(_poly_occurrences(t), start=1):
        w = fresh_name(avoid, "X")
        avoid.add(w)
        occs.append(Occurrence(i, w, path, node))
    return VariableTagging(occs)


# --------------------------------------------------------------------------
# multisystem


@dataclass
class NRSystem:
    term: Term
    tagging: Tagging
    vtag: VariableTagging
    equations: list[Equation]

    @property
    def scheme_vars(self) -> set[SchemeVar]:
        return {v for e in self.equations for s in e for v in scheme_vars(s)}

    @property
    def type_vars(self) -> set[str]:
        names = set(term_type_vars(self.term)) | set(self.vtag.fresh_vars)
        for e in self.equations:
            for s in e:
                names |= scheme_type_vars(s)
        return names - {ERASED, STAR}

    def search_bound(self) -> int:
        """Number of scheme variables times number of type variables."""
        return max(1, len(self.scheme_vars) * len(self.type_vars))


def associated_multisystem_nr(t: Term, tagging: Tagging | None = None,
                              vtag: VariableTagging | None = None) -> NRSystem:
    tagging = tagging or tag(t)
    vtag = vtag or var_tag(t)
    a = lambda u: tagging[u]  # noqa: E731
    eqs: list[Equation] = [
        e for e in associated_multisystem(t, tagging)
        if not isinstance(e[1], SForall)
    ]
    for o in vtag.occurrences:
        u = o.node
        if isinstance(u, Inst):
            base = a(u.fun)
            sup = SchemeVar(base.index, o.fresh)
            eqs.append((SVar(a(u)), SVar(sup, ((u.tyvar, o.fresh),))))
            eqs.append((SVar(base), SForall(o.fresh, SVar(sup))))
        else:
            eqs.append((SVar(a(u)), SForall(o.fresh, substitute(SVar(a(u.body)), o.fresh, u.binder))))
    return NRSystem(t, tagging, vtag, eqs)


# --------------------------------------------------------------------------
# constraints


@dataclass(frozen=True)
class OccAtom:
    """``Occ(X, s)`` or its negation; ``source`` is the occurrence id."""

    var: str
    scheme: Scheme
    positive: bool
    source: int = 0

    def __str__(self) -> str:
        sign = "" if self.positive else "¬"
        return f"{sign}Occ({self.var}, {print_scheme(self.scheme)})"


Mode = Union[str, frozenset]


def selected(mode: Mode, occ_id: int) -> bool:
    if mode == "all":
        return True
    if mode == "none":
        return False
    return occ_id in mode


def constraints(sys: NRSystem, mode: Mode = "all") -> list[OccAtom]:
    """The constraint set; positive atoms only for occurrences selected by ``mode``.

    Negative atoms are the generalisation side conditions and are always kept.
    """
    out: list[OccAtom] = []
    tg = sys.tagging
    for o in sys.vtag.occurrences:
        u = o.node
        if isinstance(u, Inst):
            if selected(mode, o.id):
                out.append(OccAtom(o.fresh, SVar(SchemeVar(tg[u.fun].index, o.fresh)), True, o.id))
        else:
            if selected(mode, o.id):
                out.append(OccAtom(u.binder, SVar(tg[u.body]), True, o.id))
            for x in sorted(free_vars(u.body)):
                out.append(OccAtom(u.binder, SVar(tg[x]), False, o.id))
    return out


# --------------------------------------------------------------------------
# reduction


def _dedupe(e: tuple) -> tuple:
    out = []
    for s in e:
        if s not in out:
            out.append(s)
    return tuple(out)


def erase_fresh(e: Equation, fresh: list[str]) -> Equation:
    """Apply ``[∘/W]`` for every fresh variable W."""
    out = []
    for s in e:
        for w in fresh:
            s = substitute(s, ERASED, w)
        out.append(s)
    return tuple(out)


def bracket_scheme(s: Scheme) -> Scheme:
    """Forget pendings, superscripts and binder names."""
    if isinstance(s, SVar):
        return SVar(SchemeVar(s.var.index, s.var.sup))
    if isinstance(s, SArrow):
        return SArrow(bracket_scheme(s.left), bracket_scheme(s.right))
    return SForall(STAR, bracket_scheme(s.body))


@dataclass
class NRReduction:
    system: list[Equation]
    trace: list[str] = field(default_factory=list)
    steps: int = 0
    bound: int = 0
    capped: bool = False


def _find_join(ms: list[Equation]) -> tuple[int, int, int, int] | None:
    for a in range(len(ms)):
        for b in range(a + 1, len(ms)):
            for i, s in enumerate(ms[a]):
                if not is_variant(s):
                    continue
                for j, s2 in enumerate(ms[b]):
                    if is_variant(s2) and s2.var == s.var:
                        return a, b, i, j
    return None


def _find_pair(ms: list[Equation], kind: type) -> tuple[int, int, int] | None:
    for k, e in enumerate(ms):
        idx = [i for i, s in enumerate(e) if isinstance(s, kind)]
        if len(idx) >= 2:
            return k, idx[1], idx[0]
    return None


def _step(ms: list[Equation], fresh: list[str], trace: list[str]) -> bool:
    hit = _find_join(ms)
    if hit is not None:
        a, b, i, j = hit
        e, e2 = ms[a], ms[b]
        rest = e[:i] + e[i + 1:]
        if e[i] == e2[j]:
            merged = _dedupe(rest + e2)
            rule = "Join"
        else:
            merged = _dedupe(erase_fresh(rest, fresh) + erase_fresh(e2, fresh))
            rule = "Join◯"
        trace.append(f"{rule}: {print_equation(e)} & {print_equation(e2)} => {print_equation(merged)}")
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
            x, sig = e[i].binder, e[i].body
            y, tau = e[j].binder, e[j].body
            if x == y:
                new = [(sig, tau)]
            else:
                new = [(sig, substitute(tau, x, y)), (tau, substitute(sig, y, x))]
            rule = "Quant"
        new = [_dedupe(n) for n in new]
        kept = [n for n in new if len(n) >= 2]
        trace.append(
            f"{rule}: {print_equation(e)} => " + "; ".join(print_equation(n) for n in [rest] + kept if len(n) >= 2)
        )
        if len(rest) >= 2:
            ms[k] = rest
        else:
            del ms[k]
        ms.extend(kept)
        return True
    return False


def reduce_nr(sys: NRSystem, max_steps: int | None = None) -> NRReduction:
    """Rewrite with Join (◯-erasing when pendings differ), Arr and Quant.

    The step count is certified against the termination bound of the
    two-variable image of the initial system.
    """
    work = [e for e in (_dedupe(e) for e in sys.equations) if len(e) >= 2]
    image = [tuple(bracket_scheme(s) for s in e) for e in work]
    bound = termination_bound(image)
    # every Quant step has two conclusions, which the image sees as one rule
    # and one extra join, so twice the bound is always enough
    cap = max_steps if max_steps is not None else 2 * bound + 16
    red = NRReduction(work, bound=bound)
    fresh = sys.vtag.fresh_vars
    while red.steps < cap:
        if not _step(work, fresh, red.trace):
            return red
        red.steps += 1
    red.capped = True
    return red


def image_reduces(sys: NRSystem) -> bool:
    """The two-variable image of the system reduces without a clash."""
    return reduce_bullet(associated_multisystem(erase_poly(sys.term))).clash is None


# --------------------------------------------------------------------------
# terminals


@dataclass
class Terminals:
    terminals: list[SchemeVar]
    groups: list[list[SchemeVar]]
    descendants: dict[SchemeVar, list[SchemeVar]]


def terminals(ms: list[Equation]) -> Terminals:
    """Terminal scheme variables, their groups, and the descendant digraph.

    Raises Untypable when a multiequation clashes or descendants cycle.
    """
    allvars: set[SchemeVar] = set()
    complex_of: dict[SchemeVar, Scheme] = {}
    for e in ms:
        comps = [s for s in e if not is_variant(s)]
        if any(isinstance(s, SArrow) for s in comps) and any(isinstance(s, SForall) for s in comps):
            raise Untypable(f"clash: {print_equation(e)}")
        for s in e:
            allvars |= set(scheme_vars(s))
        if comps:
            for s in e:
                if is_variant(s):
                    complex_of.setdefault(s.var, comps[0])
    desc = {v: sorted(set(scheme_vars(c))) for v, c in complex_of.items()}
    term_vars = sorted(allvars - set(complex_of))

    colour: dict[SchemeVar, int] = {}

    def visit(v: SchemeVar) -> None:
        colour[v] = 1
        for w in desc.get(v, []):
            if colour.get(w) == 1:
                raise Untypable(f"cycle through {w}")
            if not colour.get(w):
                visit(w)
        colour[v] = 2

    for v in sorted(desc):
        if not colour.get(v):
            visit(v)

    parent = {v: v for v in term_vars}

    def find(v: SchemeVar) -> SchemeVar:
        while parent[v] != v:
            v = parent[v]
        return v

    for e in ms:
        vs = [s.var for s in e if is_variant(s) and s.var in parent]
        for v in vs[1:]:
            a, b = find(vs[0]), find(v)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[SchemeVar, list[SchemeVar]] = {}
    for v in term_vars:
        groups.setdefault(find(v), []).append(v)
    return Terminals(term_vars, sorted(groups.values()), desc)


__all__ = [
    "ERASED", "Occurrence", "VariableTagging", "var_tag", "NRSystem",
    "associated_multisystem_nr", "OccAtom", "Mode", "selected", "constraints",
    "NRReduction", "reduce_nr", "erase_fresh", "bracket_scheme", "image_reduces",
    "Terminals", "terminals",
]
