"""Terms of the λΠ-calculus modulo theory.

Named representation with capture-avoiding substitution.  Binder names are
irrelevant: ``==`` on terms is alpha-equivalence, and ``hash`` ignores every
variable name so that alpha-equal terms collide.

Identifiers may carry the reserved marker ``'``.  Fresh names are built by
appending primes, derived translation names by appending ``'star`` /
``'plus`` (see :mod:`pfk.interp`).
"""

from __future__ import annotations

import dataclasses
from typing import Iterable, Mapping

MARKER = "'"

TYPE_TAG = "TYPE"
KIND_TAG = "KIND"


class Term:
    """Base class of the term syntax.  Subclasses are frozen dataclasses."""

    __slots__ = ()

    @property
    def fv(self) -> frozenset:
        return self._fv

    def __eq__(self, other):
        if not isinstance(other, Term):
            return NotImplemented
        return alpha_equal(self, other)

    def __hash__(self):
        return self._shape

    def __str__(self):
        from pfk.surface import print_term

        try:
            return print_term(self)
        except ValueError:
            return repr(self)


def _frozen(cls):
    return dataclasses.dataclass(frozen=True, eq=False, repr=True)(cls)


@_frozen
class Sort(Term):
    tag: str

    def __post_init__(self):
        if self.tag not in (TYPE_TAG, KIND_TAG):
            raise ValueError(f"unknown sort {self.tag!r}")
        object.__setattr__(self, "_fv", frozenset())
        object.__setattr__(self, "_shape", hash(("S", self.tag)))

    @property
    def is_type(self) -> bool:
        return self.tag == TYPE_TAG


@_frozen
class Var(Term):
    name: str

    def __post_init__(self):
        object.__setattr__(self, "_fv", frozenset((self.name,)))
        object.__setattr__(self, "_shape", hash("V"))


@_frozen
class Const(Term):
    name: str

    def __post_init__(self):
        object.__setattr__(self, "_fv", frozenset())
        object.__setattr__(self, "_shape", hash(("C", self.name)))


@_frozen
class App(Term):
    fun: Term
    arg: Term

    def __post_init__(self):
        object.__setattr__(self, "_fv", self.fun._fv | self.arg._fv)
        object.__setattr__(self, "_shape", hash(("A", self.fun._shape, self.arg._shape)))


@_frozen
class Lam(Term):
    binder: str
    ann: Term
    body: Term

    def __post_init__(self):
        object.__setattr__(self, "_fv", self.ann._fv | (self.body._fv - {self.binder}))
        object.__setattr__(self, "_shape", hash(("L", self.ann._shape, self.body._shape)))


@_frozen
class Pi(Term):
    binder: str
    dom: Term
    cod: Term

    def __post_init__(self):
        object.__setattr__(self, "_fv", self.dom._fv | (self.cod._fv - {self.binder}))
        object.__setattr__(self, "_shape", hash(("P", self.dom._shape, self.cod._shape)))


@_frozen
class Hole(Term):
    """Metavariable placeholder used only inside the translator."""

    def __post_init__(self):
        object.__setattr__(self, "_fv", frozenset())
        object.__setattr__(self, "_shape", hash("H"))


TYPE = Sort(TYPE_TAG)
KIND = Sort(KIND_TAG)
HOLE = Hole()


# -- small constructors -------------------------------------------------------


def apps(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def arrow(dom: Term, cod: Term, binder: str = "_") -> Pi:
    """Non-dependent product; the binder is renamed if it would be captured."""
    if binder in cod.fv:
        binder = fresh_name(binder, cod.fv)
    return Pi(binder, dom, cod)


def spine(t: Term) -> tuple[Term, list[Term]]:
    """Split ``h a1 ... an`` into ``(h, [a1, ..., an])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def binders(t: Term) -> Iterable[str]:
    stack = [t]
    while stack:
        u = stack.pop()
        match u:
            case Lam(x, a, b) | Pi(x, a, b):
                yield x
                stack += (a, b)
            case App(f, a):
                stack += (f, a)


def constants(t: Term) -> set[str]:
    out = set()
    stack = [t]
    while stack:
        u = stack.pop()
        match u:
            case Const(c):
                out.add(c)
            case App(f, a):
                stack += (f, a)
            case Lam(_, a, b) | Pi(_, a, b):
                stack += (a, b)
    return out


def contains_hole(t: Term) -> bool:
    stack = [t]
    while stack:
        u = stack.pop()
        match u:
            case Hole():
                return True
            case App(f, a):
                stack += (f, a)
            case Lam(_, a, b) | Pi(_, a, b):
                stack += (a, b)
    return False


def is_identifier(name: str) -> bool:
    if not name or name[0] == MARKER:
        return False
    return all(ch.isascii() and (ch.isalnum() or ch in "_" + MARKER) for ch in name)


# -- names --------------------------------------------------------------------


def fresh_name(name: str, avoid) -> str:
    """Smallest prime-suffixed variant of ``name`` that is not in ``avoid``."""
    candidate = name + MARKER
    while candidate in avoid:
        candidate += MARKER
    return candidate


def free_variables(t: Term) -> frozenset:
    return t.fv


# -- substitution -------------------------------------------------------------


def substitute(t: Term, s: Mapping[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution of variables by terms."""
    s = {x: u for x, u in s.items() if x in t.fv}
    if not s:
        return t
    return _subst(t, s)


def _subst(t: Term, s: dict) -> Term:
    match t:
        case Var(x):
            return s.get(x, t)
        case App(f, a):
            return App(_subst_opt(f, s), _subst_opt(a, s))
        case Lam(x, a, b):
            x2, b2 = _under_binder(x, b, s)
            return Lam(x2, _subst_opt(a, s), b2)
        case Pi(x, a, b):
            x2, b2 = _under_binder(x, b, s)
            return Pi(x2, _subst_opt(a, s), b2)
    return t


def _subst_opt(t: Term, s: dict) -> Term:
    live = {x: u for x, u in s.items() if x in t.fv}
    return _subst(t, live) if live else t


def _under_binder(x: str, body: Term, s: dict) -> tuple[str, Term]:
    inner = {y: u for y, u in s.items() if y != x and y in body.fv}
    if not inner:
        return x, body
    range_fv = frozenset().union(*(u.fv for u in inner.values()))
    if x in range_fv:
        x2 = fresh_name(x, range_fv | body.fv | inner.keys())
        inner[x] = Var(x2)
        return x2, _subst(body, inner)
    return x, _subst(body, inner)


def rename_bound(x: str, body: Term, new: str) -> Term:
    """``body[x <- new]``, for use when opening a binder with a chosen name."""
    if x == new:
        return body
    return substitute(body, {x: Var(new)})


# -- alpha-equivalence --------------------------------------------------------


def alpha_equal(t: Term, u: Term) -> bool:
    """True iff ``t`` and ``u`` differ only in bound-variable names."""
    if t is u:
        return True
    return _alpha(t, u, {}, {}, 0)


def _alpha(t: Term, u: Term, env_t: dict, env_u: dict, depth: int) -> bool:
    if t._shape != u._shape:
        return False
    match t, u:
        case Var(x), Var(y):
            bx, by = env_t.get(x), env_u.get(y)
            if bx is None and by is None:
                return x == y
            return bx == by
        case Const(c), Const(d):
            return c == d
        case Sort(a), Sort(b):
            return a == b
        case Hole(), Hole():
            return True
        case App(f, a), App(g, b):
            return _alpha(f, g, env_t, env_u, depth) and _alpha(a, b, env_t, env_u, depth)
        case (Lam(x, a, b), Lam(y, c, d)) | (Pi(x, a, b), Pi(y, c, d)):
            if type(t) is not type(u):
                return False
            if not _alpha(a, c, env_t, env_u, depth):
                return False
            return _alpha(b, d, {**env_t, x: depth}, {**env_u, y: depth}, depth + 1)
    return False
