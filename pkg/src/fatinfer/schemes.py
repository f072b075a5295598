"""Type schemes over scheme variables, with pending variable substitutions.

One representation serves both engines: the two-variable engine only ever uses
empty pending lists and the binder ``*``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .syntax import STAR


@dataclass(frozen=True, order=True)
class SchemeVar:
    """A scheme variable: ``α3``, or ``α3^W`` when indexed by a fresh variable."""

    index: int
    sup: str = ""

    def __str__(self) -> str:
        return f"α{self.index}^{self.sup}" if self.sup else f"α{self.index}"


# a pending substitution [to/frm] replaces frm by to
Subst = tuple[str, str]


@dataclass(frozen=True)
class SVar:
    var: SchemeVar
    pending: tuple[Subst, ...] = ()

    def __str__(self) -> str:
        return print_scheme(self)


@dataclass(frozen=True)
class SArrow:
    left: "Scheme"
    right: "Scheme"

    def __str__(self) -> str:
        return print_scheme(self)


@dataclass(frozen=True)
class SForall:
    binder: str
    body: "Scheme"

    def __str__(self) -> str:
        return print_scheme(self)


Scheme = Union[SVar, SArrow, SForall]
Equation = tuple[Scheme, ...]


def sv(index: int, sup: str = "", *pending: Subst) -> SVar:
    return SVar(SchemeVar(index, sup), tuple(pending))


def is_variant(s: Scheme) -> bool:
    return isinstance(s, SVar)


def scheme_vars(s: Scheme) -> Iterator[SchemeVar]:
    if isinstance(s, SVar):
        yield s.var
    elif isinstance(s, SArrow):
        yield from scheme_vars(s.left)
        yield from scheme_vars(s.right)
    else:
        yield from scheme_vars(s.body)


def scheme_type_vars(s: Scheme) -> set[str]:
    """Type variables named in pending substitutions and binders."""
    if isinstance(s, SVar):
        return {v for sub in s.pending for v in sub}
    if isinstance(s, SArrow):
        return scheme_type_vars(s.left) | scheme_type_vars(s.right)
    out = scheme_type_vars(s.body)
    if s.binder != STAR:
        out.add(s.binder)
    return out


def length(s: Scheme) -> int:
    if isinstance(s, SVar):
        return 1
    if isinstance(s, SArrow):
        return length(s.left) + length(s.right) + 1
    return length(s.body) + 1


# --------------------------------------------------------------------------
# pending substitution algebra


def normalise_pending(pending: tuple[Subst, ...]) -> tuple[Subst, ...]:
    """Canonical form of a substitution string.

    Drops ``[X/X]``; drops ``[Z/X]`` when an earlier ``[Y/X]`` already removed
    ``X`` and nothing in between reintroduced it; sorts adjacent substitutions
    over four distinct variables.
    """
    seq = list(pending)
    changed = True
    while changed:
        changed = False
        out: list[Subst] = []
        for to, frm in seq:
            if to == frm:
                changed = True
                continue
            gone = False
            for prev_to, prev_frm in reversed(out):
                if prev_to == frm:
                    break
                if prev_frm == frm:
                    gone = True
                    break
            if gone:
                changed = True
                continue
            out.append((to, frm))
        for i in range(len(out) - 1):
            (a, b), (c, d) = out[i], out[i + 1]
            if len({a, b, c, d}) == 4 and (d, c) < (b, a):
                out[i], out[i + 1] = out[i + 1], out[i]
                changed = True
        seq = out
    return tuple(seq)


def substitute(s: Scheme, to: str, frm: str) -> Scheme:
    """``s[to/frm]`` pushed through arrows and quantifiers."""
    if isinstance(s, SVar):
        return SVar(s.var, normalise_pending(s.pending + ((to, frm),)))
    if isinstance(s, SArrow):
        return SArrow(substitute(s.left, to, frm), substitute(s.right, to, frm))
    if s.binder == frm:
        return s
    return SForall(s.binder, substitute(s.body, to, frm))


def substitute_all(s: Scheme, subs: tuple[Subst, ...]) -> Scheme:
    for to, frm in subs:
        s = substitute(s, to, frm)
    return s


def rename_vars(s: Scheme, ren: dict[SchemeVar, SchemeVar]) -> Scheme:
    if isinstance(s, SVar):
        return SVar(ren.get(s.var, s.var), s.pending)
    if isinstance(s, SArrow):
        return SArrow(rename_vars(s.left, ren), rename_vars(s.right, ren))
    return SForall(s.binder, rename_vars(s.body, ren))


# --------------------------------------------------------------------------
# printing


def print_scheme(s: Scheme) -> str:
    if isinstance(s, SVar):
        subs = "".join(f"[{to}/{frm}]" for to, frm in s.pending)
        return f"{s.var}{subs}"
    if isinstance(s, SArrow):
        left = print_scheme(s.left)
        if not isinstance(s.left, SVar):
            left = f"({left})"
        return f"{left} → {print_scheme(s.right)}"
    binder = "•" if s.binder == STAR else s.binder
    return f"∀{binder}. {print_scheme(s.body)}"


def print_equation(e: Equation) -> str:
    return " = ".join(print_scheme(s) for s in e)
