"""Bidirectional typechecker for the λΠ-calculus modulo theory and theory
elaboration.

Typing is inferred for variables, constants, sorts, products and
applications, and checked for abstractions against a product; the
conversion rule is applied at the check/infer boundary.
"""

from __future__ import annotations

import dataclasses
from typing import Iterable, Sequence

from pfk.errors import (
    AssertionFailure,
    DuplicateConstant,
    HeadNotConstant,
    IllFormedContext,
    KernelError,
    MalformedRule,
    NonLinearPattern,
    NotAFunction,
    PreludeViolation,
    SortError,
    TypeMismatch,
    TypePreservationFailure,
    UnboundVariable,
    UnknownConstant,
)
from pfk.rewriting import Fuel, RewriteRule, _conv, _whnf, as_fuel
from pfk.terms import (
    KIND,
    TYPE,
    App,
    Const,
    Hole,
    Lam,
    Pi,
    Sort,
    Term,
    Var,
    contains_hole,
    fresh_name,
    rename_bound,
    spine,
    substitute,
)


@dataclasses.dataclass(frozen=True)
class ConstDecl:
    name: str
    type: Term
    pos: tuple[int, int] | None = dataclasses.field(default=None, compare=False)


class Theory:
    """An elaborated signature: constant declarations and rewrite rules, in order.

    ``prelude_size`` counts the leading entries that come from the built-in
    prelude (0 when the prelude is not included).
    """

    def __init__(self, entries: Iterable = (), prelude_size: int = 0, definitions=None):
        self.entries = tuple(entries)
        self.prelude_size = prelude_size
        self.definitions: dict[str, Term] = dict(definitions or {})
        self._types: dict[str, Term] = {}
        self._rules: dict[str, list[RewriteRule]] = {}
        for e in self.entries:
            self._index(e)

    def _index(self, e):
        if isinstance(e, ConstDecl):
            if e.name in self._types:
                raise DuplicateConstant(f"constant {e.name} is already declared", e.pos)
            self._types[e.name] = e.type
        else:
            self._rules.setdefault(e.head, []).append(e)

    @property
    def prelude_included(self) -> bool:
        return self.prelude_size > 0

    def lookup(self, name: str) -> Term | None:
        return self._types.get(name)

    def rules_for(self, name: str) -> list[RewriteRule]:
        return self._rules.get(name, [])

    @property
    def constants(self) -> list[str]:
        return list(self._types)

    @property
    def rules(self) -> list[RewriteRule]:
        return [e for e in self.entries if isinstance(e, RewriteRule)]

    @property
    def user_entries(self) -> tuple:
        return self.entries[self.prelude_size :]

    def is_defined(self, name: str) -> bool:
        return name in self.definitions

    def extend(self, *entries, definitions=None) -> "Theory":
        new = Theory.__new__(Theory)
        new.entries = self.entries + tuple(entries)
        new.prelude_size = self.prelude_size
        new.definitions = {**self.definitions, **(definitions or {})}
        new._types = dict(self._types)
        new._rules = {k: list(v) for k, v in self._rules.items()}
        for e in entries:
            new._index(e)
        return new

    def __contains__(self, name: str) -> bool:
        return name in self._types

    def __repr__(self):
        return f"Theory({len(self._types)} constants, {len(self.rules)} rules)"


class Context:
    """Ordered typing context with pairwise-distinct names."""

    __slots__ = ("entries", "_index")

    def __init__(self, entries: Iterable[tuple[str, Term]] = ()):
        self.entries = tuple(entries)
        self._index = {x: a for x, a in self.entries}

    @classmethod
    def of(cls, ctx) -> "Context":
        return ctx if isinstance(ctx, Context) else cls(ctx or ())

    def extend(self, name: str, ty: Term) -> "Context":
        new = Context.__new__(Context)
        new.entries = self.entries + ((name, ty),)
        new._index = {**self._index, name: ty}
        return new

    def lookup(self, name: str) -> Term | None:
        return self._index.get(name)

    @property
    def names(self):
        return self._index.keys()

    def __contains__(self, name):
        return name in self._index

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, Context) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return "Context(" + ", ".join(f"{x} : {a}" for x, a in self.entries) + ")"


@dataclasses.dataclass(frozen=True)
class Judgment:
    context: Context
    subject: Term
    type: Term

    def __str__(self):
        ctx = ", ".join(f"{x} : {a}" for x, a in self.context)
        return f"{ctx} ⊢ {self.subject} : {self.type}"


# -- the checker ------------------------------------------------------------------


def _no_hole(*terms):
    for t in terms:
        if contains_hole(t):
            raise ValueError("the typechecker does not accept terms with holes")


def check_context(sig: Theory, ctx, budget=None) -> None:
    """Raise :class:`IllFormedContext` unless every entry is a type in its prefix."""
    fuel = as_fuel(budget)
    prefix = Context()
    for name, ty in Context.of(ctx).entries:
        if name in prefix:
            raise IllFormedContext(f"variable {name} is declared twice", entry=name)
        try:
            _no_hole(ty)
            _check_is_type(sig, prefix, ty, fuel)
        except KernelError as e:
            raise IllFormedContext(f"entry {name} : {ty} is not well-typed: {e}", entry=name, cause=e) from e
        prefix = prefix.extend(name, ty)


def infer_type(sig: Theory, ctx, t: Term, budget=None) -> Term:
    ctx = Context.of(ctx)
    _no_hole(t)
    return _infer(sig, ctx, t, as_fuel(budget))


def check_type(sig: Theory, ctx, t: Term, expected: Term, budget=None) -> None:
    """Check ``ctx ⊢ t : expected``; ``expected`` must be KIND or well-sorted."""
    ctx = Context.of(ctx)
    _no_hole(t, expected)
    fuel = as_fuel(budget)
    if expected != KIND:
        s = _whnf(sig, _infer(sig, ctx, expected, fuel), fuel)
        if not isinstance(s, Sort):
            raise SortError(f"expected type {expected} is not well-sorted (its type is {s})")
    _check(sig, ctx, t, expected, fuel)


def _infer(sig: Theory, ctx: Context, t: Term, fuel: Fuel) -> Term:
    match t:
        case Sort(tag):
            if t.is_type:
                return KIND
            raise SortError("KIND has no type")
        case Var(x):
            ty = ctx.lookup(x)
            if ty is None:
                raise UnboundVariable(f"unbound variable {x}")
            return ty
        case Const(c):
            ty = sig.lookup(c)
            if ty is None:
                raise UnknownConstant(f"unknown constant {c}")
            return ty
        case App(f, u):
            fty = _whnf(sig, _infer(sig, ctx, f, fuel), fuel)
            if not isinstance(fty, Pi):
                raise NotAFunction(f"{f} has type {fty}, which is not a product")
            _check(sig, ctx, u, fty.dom, fuel)
            return substitute(fty.cod, {fty.binder: u})
        case Pi(x, a, b):
            _check_is_type(sig, ctx, a, fuel)
            x2, b2 = _open(ctx, x, b)
            s = _whnf(sig, _infer(sig, ctx.extend(x2, a), b2, fuel), fuel)
            if not isinstance(s, Sort):
                raise SortError(f"codomain {b} is not a type or a kind")
            return s
        case Lam(x, a, body):
            _check_is_type(sig, ctx, a, fuel)
            x2, body2 = _open(ctx, x, body)
            inner = ctx.extend(x2, a)
            bty = _infer(sig, inner, body2, fuel)
            if bty == KIND:
                raise SortError(f"the body of an abstraction cannot be a kind: {body}")
            return Pi(x2, a, bty)
        case Hole():
            raise ValueError("hole reached the typechecker")
    raise TypeError(f"not a term: {t!r}")


def _check(sig: Theory, ctx: Context, t: Term, expected: Term, fuel: Fuel) -> None:
    if isinstance(t, Lam):
        e = _whnf(sig, expected, fuel)
        if isinstance(e, Pi):
            _check_is_type(sig, ctx, t.ann, fuel)
            if not _conv(sig, t.ann, e.dom, fuel):
                raise TypeMismatch(
                    f"abstraction domain {t.ann} does not match {e.dom}", got=t.ann, expected=e.dom
                )
            x2 = t.binder
            if x2 in ctx or x2 in e.cod.fv - {e.binder}:
                x2 = fresh_name(x2, set(ctx.names) | t.body.fv | e.cod.fv)
            body = rename_bound(t.binder, t.body, x2)
            cod = rename_bound(e.binder, e.cod, x2)
            if cod == KIND:
                raise SortError("the body of an abstraction cannot be a kind")
            _check(sig, ctx.extend(x2, t.ann), body, cod, fuel)
            return
    got = _infer(sig, ctx, t, fuel)
    if not _conv(sig, got, expected, fuel):
        g, e = _whnf(sig, got, fuel), _whnf(sig, expected, fuel)
        raise TypeMismatch(f"{t} has type {g} but {e} was expected", got=g, expected=e)


def _check_is_type(sig, ctx, a, fuel):
    s = _whnf(sig, _infer(sig, ctx, a, fuel), fuel)
    if s != TYPE:
        raise SortError(f"{a} is not a type (its type is {s})")


def _open(ctx: Context, x: str, body: Term) -> tuple[str, Term]:
    if x not in ctx:
        return x, body
    x2 = fresh_name(x, set(ctx.names) | body.fv)
    return x2, rename_bound(x, body, x2)


def sort_of(sig: Theory, ctx, a: Term, budget=None) -> Sort:
    """The sort of the type (or kind) ``a``: TYPE or KIND."""
    fuel = as_fuel(budget)
    s = _whnf(sig, _infer(sig, Context.of(ctx), a, fuel), fuel)
    if not isinstance(s, Sort):
        raise SortError(f"{a} is neither a type nor a kind")
    return s


# -- elaboration ----------------------------------------------------------------------


def _rule_problems(rule: RewriteRule) -> None:
    head, args = spine(rule.lhs)
    if not isinstance(head, Const):
        raise HeadNotConstant(f"the head of {rule.lhs} is not a constant")
    names = [x for x, _ in rule.context]
    if len(set(names)) != len(names):
        raise MalformedRule("rule variables must be pairwise distinct")
    seen: list[str] = []

    def walk(p):
        match p:
            case Var(x):
                if x not in names:
                    raise MalformedRule(f"{x} is not a rule variable")
                seen.append(x)
            case Const(_):
                pass
            case App(_, _):
                h, xs = spine(p)
                if not isinstance(h, Const):
                    raise MalformedRule(f"pattern {p} is not headed by a constant")
                for a in xs:
                    walk(a)
            case _:
                raise MalformedRule(f"unsupported pattern {p}")

    for a in args:
        walk(a)
    dup = {x for x in seen if seen.count(x) > 1}
    if dup:
        raise NonLinearPattern(f"rule variable(s) {', '.join(sorted(dup))} occur more than once in the lhs")
    missing = [x for x in names if x not in seen]
    if missing:
        raise MalformedRule(f"rule variable(s) {', '.join(missing)} do not occur in the lhs")
    for side in (rule.lhs, rule.rhs):
        if _mentions_sort(side):
            raise MalformedRule("TYPE and KIND may not occur in rewrite rules")


def _mentions_sort(t: Term) -> bool:
    match t:
        case Sort(_):
            return True
        case App(f, a):
            return _mentions_sort(f) or _mentions_sort(a)
        case Lam(_, a, b) | Pi(_, a, b):
            return _mentions_sort(a) or _mentions_sort(b)
    return False


class Elaborator:
    """Adds entries to a theory one at a time, checking each against the prefix."""

    def __init__(self, theory: Theory | None = None, budget=None):
        self.theory = theory if theory is not None else Theory()
        self.budget = budget

    def _fuel(self):
        return as_fuel(self.budget)

    def declare(self, name: str, ty: Term, pos=None) -> ConstDecl:
        try:
            self._check_decl(name, ty)
        except KernelError as e:
            raise e.at(pos)
        decl = ConstDecl(name, ty, pos)
        self.theory = self.theory.extend(decl)
        return decl

    def _check_decl(self, name, ty):
        if name in self.theory:
            raise DuplicateConstant(f"constant {name} is already declared")
        _no_hole(ty)
        if ty.fv:
            raise UnboundVariable(f"type of {name} has free variables {sorted(ty.fv)}")
        s = sort_of(self.theory, Context(), ty, self._fuel())
        if self.theory.prelude_included and s != TYPE:
            raise PreludeViolation(f"{name} : {ty} is a kind; user constants must have a type")

    def add_rule(self, context, lhs: Term, rhs: Term, pos=None, name=None) -> RewriteRule:
        rule = RewriteRule(tuple(context), lhs, rhs, name)
        try:
            _rule_problems(rule)
            fuel = self._fuel()
            check_context(self.theory, rule.context, fuel)
            ctx = Context(rule.context)
            lty = _infer(self.theory, ctx, lhs, fuel)
            rty = _infer(self.theory, ctx, rhs, fuel)
            if not _conv(self.theory, lty, rty, fuel):
                raise TypePreservationFailure(f"lhs has type {lty} but rhs has type {rty}")
        except KernelError as e:
            raise e.at(pos)
        self.theory = self.theory.extend(rule)
        return rule

    def define(self, name: str, ty: Term, body: Term, pos=None) -> None:
        try:
            self._check_decl(name, ty)
            _no_hole(body)
            if body.fv:
                raise UnboundVariable(f"definition of {name} has free variables {sorted(body.fv)}")
            _check(self.theory, Context(), body, ty, self._fuel())
        except KernelError as e:
            raise e.at(pos)
        decl = ConstDecl(name, ty, pos)
        rule = RewriteRule((), Const(name), body, name)
        self.theory = self.theory.extend(decl, rule, definitions={name: body})

    def assert_conv(self, t: Term, u: Term, pos=None) -> None:
        try:
            fuel = self._fuel()
            _infer(self.theory, Context(), t, fuel)
            _infer(self.theory, Context(), u, fuel)
            if not _conv(self.theory, t, u, fuel):
                raise AssertionFailure(f"{t} and {u} are not convertible")
        except KernelError as e:
            raise e.at(pos)

    def assert_type(self, t: Term, ty: Term, pos=None) -> None:
        try:
            check_type(self.theory, Context(), t, ty, self._fuel())
        except KernelError as e:
            raise e.at(pos)

    def add_item(self, item) -> None:
        from pfk import surface

        match item:
            case surface.Decl(name, ty, pos):
                self.declare(name, ty, pos)
            case surface.RuleItem(context, lhs, rhs, pos):
                self.add_rule(context, lhs, rhs, pos)
            case surface.Def(name, ty, body, pos):
                self.define(name, ty, body, pos)
            case surface.AssertConv(t, u, pos):
                self.assert_conv(t, u, pos)
            case surface.AssertType(t, ty, pos):
                self.assert_type(t, ty, pos)
            case surface.Require(_, _):
                pass
            case _:
                raise TypeError(f"not an item: {item!r}")


def elaborate_theory(items: Sequence, prelude: bool = False, budget=None) -> Theory:
    """Elaborate parsed items into a theory, optionally on top of the prelude.

    Stops at the first error.  ``Require`` items are ignored here; file
    inclusion is resolved by :func:`pfk.surface.load_items`.
    """
    if prelude:
        from pfk.prelude import prelude_signature

        base = prelude_signature()
        theory = Theory(base.entries, prelude_size=len(base.entries))
    else:
        theory = Theory()
    el = Elaborator(theory, budget)
    for item in items:
        el.add_item(item)
    return el.theory
