"""Types, terms, concrete syntax and the structural translations.

Type variables are capitalised identifiers; assumption variables start with a
lowercase letter.  Two names are reserved: ``O`` is the ground atom used by the
collapse translations and ``*`` is the single quantified variable of the
two-variable subsystem.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

ATOM = "O"
STAR = "*"
FILL = "⋆"  # the distinguished variable of adequate typings


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class CaptureError(ValueError):
    """Raised when a substitution would capture the substituted variable."""


# --------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class TVar:
    name: str

    def __str__(self) -> str:
        return print_type(self)


@dataclass(frozen=True)
class Arrow:
    left: "Type"
    right: "Type"

    def __str__(self) -> str:
        return print_type(self)


@dataclass(frozen=True)
class Forall:
    binder: str
    body: "Type"

    def __str__(self) -> str:
        return print_type(self)


Type = Union[TVar, Arrow, Forall]


# --------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class Abs:
    binder: str
    body: "Term"

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class Inst:
    fun: "Term"
    tyvar: str

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class Gen:
    binder: str
    body: "Term"

    def __str__(self) -> str:
        return print_term(self)


Term = Union[Var, App, Abs, Inst, Gen]


@dataclass
class Typing:
    """An environment for the free assumption variables plus a result type.

    ``binders`` optionally records the types given to lambda-bound names, which
    turns a typing into a replayable derivation.
    """

    env: dict[str, Type]
    result: Type
    binders: dict[str, Type] | None = None

    def __str__(self) -> str:
        return print_typing(self)


# --------------------------------------------------------------------------
# lexer / parser

_TOKEN = re.compile(
    r"\s*(?:(?P<gen>/\\)|(?P<lam>\\|λ)|(?P<arrow>->|→)|(?P<forall>forall\b|∀)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_']*)|(?P<star>\*|•)|(?P<fill>⋆)|(?P<punct>[().]))"
)


def _tokens(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
        kind = m.lastgroup
        value = m.group(kind)
        start = m.start(kind)
        if kind == "ident":
            kind = "uvar" if value[0].isupper() else "lvar"
        elif kind == "star":
            kind, value = "uvar", STAR
        elif kind == "fill":
            kind = "uvar"
        elif kind == "punct":
            kind = value
        out.append((kind, value, start))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def next(self) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            found = tok[1] or "end of input"
            raise ParseError(f"expected {kind!r}, found {found!r}", tok[2])
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])

    # terms
    def term(self) -> Term:
        kind = self.peek()[0]
        if kind == "lam":
            self.next()
            name = self.expect("lvar")[1]
            self.expect(".")
            return Abs(name, self.term())
        if kind == "gen":
            self.next()
            name = self.expect("uvar")[1]
            self.expect(".")
            return Gen(name, self.term())
        return self.app()

    def app(self) -> Term:
        head = self.atom()
        while True:
            kind, value, _ = self.peek()
            if kind == "uvar":
                self.next()
                head = Inst(head, value)
            elif kind in ("lvar", "("):
                head = App(head, self.atom())
            elif kind in ("lam", "gen"):
                # a trailing abstraction extends to the right
                return App(head, self.term())
            else:
                return head

    def atom(self) -> Term:
        kind, value, pos = self.next()
        if kind == "lvar":
            return Var(value)
        if kind == "(":
            t = self.term()
            self.expect(")")
            return t
        raise ParseError(f"expected a term, found {value or 'end of input'!r}", pos)

    # types
    def type(self) -> Type:
        if self.peek()[0] == "forall":
            self.next()
            name = self.expect("uvar")[1]
            self.expect(".")
            return Forall(name, self.type())
        left = self.tyatom()
        if self.peek()[0] == "arrow":
            self.next()
            return Arrow(left, self.type())
        return left

    def tyatom(self) -> Type:
        kind, value, pos = self.next()
        if kind == "uvar":
            return TVar(value)
        if kind == "(":
            a = self.type()
            self.expect(")")
            return a
        raise ParseError(f"expected a type, found {value or 'end of input'!r}", pos)


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    p.done()
    return t


def parse_type(text: str) -> Type:
    p = _Parser(text)
    a = p.type()
    p.done()
    return a


def parse_env(text: str) -> dict[str, Type]:
    """Parse ``x: A, y: B``; commas at nesting depth zero separate entries."""
    env: dict[str, Type] = {}
    if not text.strip():
        return env
    depth, start, parts = 0, 0, []
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    for part in parts:
        name, sep, ty = part.partition(":")
        name = name.strip()
        if not sep or not re.fullmatch(r"[a-z][A-Za-z0-9_']*", name):
            raise ParseError(f"bad environment entry {part.strip()!r}", 0)
        env[name] = parse_type(ty)
    return env


# --------------------------------------------------------------------------
# printing


def print_type(a: Type) -> str:
    if isinstance(a, TVar):
        return a.name
    if isinstance(a, Forall):
        return f"forall {a.binder}. {print_type(a.body)}"
    left = print_type(a.left)
    if not isinstance(a.left, TVar):
        left = f"({left})"
    return f"{left} -> {print_type(a.right)}"


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Abs):
        return f"\\{t.binder}. {print_term(t.body)}"
    if isinstance(t, Gen):
        return f"/\\{t.binder}. {print_term(t.body)}"
    if isinstance(t, Inst):
        return f"{_fun_part(t.fun)} {t.tyvar}"
    arg = print_term(t.arg)
    if not isinstance(t.arg, Var):
        arg = f"({arg})"
    return f"{_fun_part(t.fun)} {arg}"


def _fun_part(t: Term) -> str:
    s = print_term(t)
    return f"({s})" if isinstance(t, (Abs, Gen)) else s


def print_typing(typing: Typing) -> str:
    env = ", ".join(f"{x}: {print_type(a)}" for x, a in sorted(typing.env.items()))
    return f"{env} |- {print_type(typing.result)}" if env else f"|- {print_type(typing.result)}"


# --------------------------------------------------------------------------
# term structure


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order traversal of all subterm occurrences."""
    yield t
    if isinstance(t, App):
        yield from subterms(t.fun)
        yield from subterms(t.arg)
    elif isinstance(t, (Abs, Gen)):
        yield from subterms(t.body)
    elif isinstance(t, Inst):
        yield from subterms(t.fun)


def free_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    if isinstance(t, Abs):
        return free_vars(t.body) - {t.binder}
    if isinstance(t, Gen):
        return free_vars(t.body)
    return free_vars(t.fun)


def free_vars_ordered(t: Term) -> list[str]:
    """Free assumption variables in order of first occurrence."""
    seen: list[str] = []

    def walk(u: Term, bound: frozenset[str]) -> None:
        if isinstance(u, Var):
            if u.name not in bound and u.name not in seen:
                seen.append(u.name)
        elif isinstance(u, App):
            walk(u.fun, bound)
            walk(u.arg, bound)
        elif isinstance(u, Abs):
            walk(u.body, bound | {u.binder})
        elif isinstance(u, Gen):
            walk(u.body, bound)
        else:
            walk(u.fun, bound)

    walk(t, frozenset())
    return seen


def bound_vars(t: Term) -> list[str]:
    """Lambda binders in pre-order, with repetitions."""
    return [u.binder for u in subterms(t) if isinstance(u, Abs)]


def term_type_vars(t: Term) -> set[str]:
    """Type variables mentioned by instantiation and generalisation nodes."""
    out = set()
    for u in subterms(t):
        if isinstance(u, Inst):
            out.add(u.tyvar)
        elif isinstance(u, Gen):
            out.add(u.binder)
    return out


def term_size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def is_curry(t: Term) -> bool:
    return not any(isinstance(u, (Inst, Gen)) for u in subterms(t))


def is_bullet(t: Term) -> bool:
    return all(
        u.tyvar == STAR if isinstance(u, Inst) else u.binder == STAR
        for u in subterms(t)
        if isinstance(u, (Inst, Gen))
    )


def barendregt_check(t: Term) -> bool:
    binders = bound_vars(t)
    if len(set(binders)) != len(binders):
        return False
    return not (set(binders) & free_vars(t))


# --------------------------------------------------------------------------
# types: variables, substitution, alpha-equivalence


def free_type_vars(a: Type) -> set[str]:
    if isinstance(a, TVar):
        return {a.name}
    if isinstance(a, Arrow):
        return free_type_vars(a.left) | free_type_vars(a.right)
    return free_type_vars(a.body) - {a.binder}


def all_type_names(a: Type) -> set[str]:
    if isinstance(a, TVar):
        return {a.name}
    if isinstance(a, Arrow):
        return all_type_names(a.left) | all_type_names(a.right)
    return all_type_names(a.body) | {a.binder}


def subst_type(a: Type, x: str, y: str) -> Type:
    """``a[y/x]``: replace free occurrences of ``x`` by ``y``.

    Raises CaptureError instead of renaming when ``y`` would be captured.
    """
    if x == y:
        return a
    if isinstance(a, TVar):
        return TVar(y) if a.name == x else a
    if isinstance(a, Arrow):
        return Arrow(subst_type(a.left, x, y), subst_type(a.right, x, y))
    if a.binder == x:
        return a
    if a.binder == y and x in free_type_vars(a.body):
        raise CaptureError(f"{y} would be captured by forall {a.binder}")
    return Forall(a.binder, subst_type(a.body, x, y))


def fresh_name(avoid: set[str], prefix: str = "Z") -> str:
    i = 1
    while f"{prefix}{i}" in avoid:
        i += 1
    return f"{prefix}{i}"


def subst_type_avoiding(a: Type, x: str, y: str) -> Type:
    """Capture-avoiding ``a[y/x]``; renames binders as needed."""
    if x == y:
        return a
    if isinstance(a, TVar):
        return TVar(y) if a.name == x else a
    if isinstance(a, Arrow):
        return Arrow(subst_type_avoiding(a.left, x, y), subst_type_avoiding(a.right, x, y))
    if a.binder == x or x not in free_type_vars(a.body):
        return a
    if a.binder == y:
        z = fresh_name(all_type_names(a) | {x, y})
        return Forall(z, subst_type_avoiding(subst_type(a.body, y, z), x, y))
    return Forall(a.binder, subst_type_avoiding(a.body, x, y))


def _debruijn(a: Type, env: tuple[str, ...]) -> tuple:
    if isinstance(a, TVar):
        if a.name in env:
            return ("b", env.index(a.name))
        return ("f", a.name)
    if isinstance(a, Arrow):
        return ("->", _debruijn(a.left, env), _debruijn(a.right, env))
    return ("all", _debruijn(a.body, (a.binder,) + env))


def alpha_key(a: Type) -> tuple:
    """A canonical nameless form; equal keys iff alpha-equivalent."""
    return _debruijn(a, ())


def alpha_eq(a: Type, b: Type) -> bool:
    return alpha_key(a) == alpha_key(b)


def type_size(a: Type) -> int:
    if isinstance(a, TVar):
        return 1
    if isinstance(a, Arrow):
        return 1 + type_size(a.left) + type_size(a.right)
    return 1 + type_size(a.body)


# --------------------------------------------------------------------------
# translations


def collapse_type(a: Type) -> Type:
    """Every variable becomes ``O``; quantifiers disappear."""
    if isinstance(a, TVar):
        return TVar(ATOM)
    if isinstance(a, Arrow):
        return Arrow(collapse_type(a.left), collapse_type(a.right))
    return collapse_type(a.body)


def bracket_type(a: Type) -> Type:
    """Every variable becomes ``O`` and every binder becomes ``*``."""
    if isinstance(a, TVar):
        return TVar(ATOM)
    if isinstance(a, Arrow):
        return Arrow(bracket_type(a.left), bracket_type(a.right))
    return Forall(STAR, bracket_type(a.body))


def erase_types(t: Term) -> Term:
    """Drop instantiation and generalisation nodes."""
    if isinstance(t, Var):
        return t
    if isinstance(t, App):
        return App(erase_types(t.fun), erase_types(t.arg))
    if isinstance(t, Abs):
        return Abs(t.binder, erase_types(t.body))
    if isinstance(t, Gen):
        return erase_types(t.body)
    return erase_types(t.fun)


def erase_poly(t: Term) -> Term:
    """Replace every instantiated and generalised type variable by ``*``."""
    if isinstance(t, Var):
        return t
    if isinstance(t, App):
        return App(erase_poly(t.fun), erase_poly(t.arg))
    if isinstance(t, Abs):
        return Abs(t.binder, erase_poly(t.body))
    if isinstance(t, Gen):
        return Gen(STAR, erase_poly(t.body))
    return Inst(erase_poly(t.fun), STAR)


def rename_term_tyvar(t: Term, old: str, new: str) -> Term:
    if isinstance(t, Var):
        return t
    if isinstance(t, App):
        return App(rename_term_tyvar(t.fun, old, new), rename_term_tyvar(t.arg, old, new))
    if isinstance(t, Abs):
        return Abs(t.binder, rename_term_tyvar(t.body, old, new))
    if isinstance(t, Gen):
        return Gen(new if t.binder == old else t.binder, rename_term_tyvar(t.body, old, new))
    return Inst(rename_term_tyvar(t.fun, old, new), new if t.tyvar == old else t.tyvar)
