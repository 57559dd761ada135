"""β-reduction and user rewrite rules: matching, weak-head normalisation and
the conversion test.

Every function that reduces takes a ``budget``.  A :class:`ReductionBudget`
is a plain configuration value; each public call draws a fresh
:class:`Fuel` counter from it, shared by all the reductions that call
performs.  Internal callers thread one ``Fuel`` through many calls so a
whole typing or obligation check is bounded as a unit.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Optional, Protocol

from pfk.errors import BudgetExhausted
from pfk.terms import (
    App,
    Const,
    Hole,
    Lam,
    Pi,
    Sort,
    Term,
    Var,
    alpha_equal,
    apps,
    contains_hole,
    fresh_name,
    rename_bound,
    spine,
    substitute,
)

DEFAULT_MAX_STEPS = 100_000


@dataclasses.dataclass(frozen=True)
class RewriteRule:
    context: tuple[tuple[str, Term], ...]
    lhs: Term
    rhs: Term
    name: str | None = None

    @property
    def head(self) -> str:
        h, _ = spine(self.lhs)
        assert isinstance(h, Const)
        return h.name

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(x for x, _ in self.context)


@dataclasses.dataclass(frozen=True)
class ReductionBudget:
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    def fuel(self) -> "Fuel":
        return Fuel(self.max_steps)


class Fuel:
    """Mutable step counter drawn from a :class:`ReductionBudget`."""

    __slots__ = ("limit", "remaining")

    def __init__(self, limit: int):
        self.limit = limit
        self.remaining = limit

    def tick(self):
        if self.remaining <= 0:
            raise BudgetExhausted(f"reduction budget of {self.limit} steps exhausted")
        self.remaining -= 1


def as_fuel(budget) -> Fuel:
    if isinstance(budget, Fuel):
        return budget
    if budget is None:
        return Fuel(DEFAULT_MAX_STEPS)
    if isinstance(budget, int):
        return Fuel(budget)
    return budget.fuel()


class Signature(Protocol):
    def rules_for(self, name: str) -> list[RewriteRule]: ...


# -- matching -----------------------------------------------------------------


def match_rule(rule: RewriteRule, t: Term) -> Optional[dict[str, Term]]:
    """Syntactic first-order matching of ``rule.lhs`` against ``t``.

    Returns the substitution over the rule variables, or ``None``.
    """
    if contains_hole(t):
        raise ValueError("cannot match a term containing a hole")
    theta: dict[str, Term] = {}
    if _match(rule.lhs, t, frozenset(rule.variables), theta, None):
        return theta
    return None


def _match(pattern, t, rule_vars, theta, reduce: Callable[[Term], Term] | None) -> bool:
    match pattern:
        case Var(x) if x in rule_vars:
            if x in theta:
                # left-linearity is enforced at elaboration; stay correct anyway
                return alpha_equal(theta[x], t)
            theta[x] = t
            return True
    if reduce is not None:
        t = reduce(t)
    phead, pargs = spine(pattern)
    thead, targs = spine(t)
    if len(pargs) != len(targs):
        return False
    match phead, thead:
        case Const(c), Const(d) if c == d:
            pass
        case Var(x), Var(y) if x == y:
            pass
        case _:
            if pargs or not alpha_equal(phead, thead):
                return False
    return all(_match(p, a, rule_vars, theta, reduce) for p, a in zip(pargs, targs))


def _head_step(sig: Signature, t: Term, fuel: Fuel) -> Term | None:
    """One head step (β first, then rules in declaration order) or None."""
    head, args = spine(t)
    if isinstance(head, Lam) and args:
        fuel.tick()
        body = substitute(head.body, {head.binder: args[0]})
        return apps(body, *args[1:])
    if isinstance(head, Const):
        for rule in sig.rules_for(head.name):
            _, pargs = spine(rule.lhs)
            k = len(pargs)
            if len(args) < k:
                continue
            theta: dict[str, Term] = {}
            rule_vars = frozenset(rule.variables)
            reduce = lambda u: _whnf(sig, u, fuel)
            if all(_match(p, a, rule_vars, theta, reduce) for p, a in zip(pargs, args[:k])):
                fuel.tick()
                return apps(substitute(rule.rhs, theta), *args[k:])
    return None


def whnf(sig: Signature, t: Term, budget=None) -> Term:
    """Weak-head normal form; raises :class:`BudgetExhausted` on a runaway."""
    if contains_hole(t):
        raise ValueError("cannot reduce a term containing a hole")
    return _whnf(sig, t, as_fuel(budget))


def _whnf(sig: Signature, t: Term, fuel: Fuel) -> Term:
    while True:
        nxt = _head_step(sig, t, fuel)
        if nxt is None:
            return t
        t = nxt


# -- conversion -----------------------------------------------------------------


def convertible(sig: Signature, t: Term, u: Term, budget=None) -> bool:
    """Decide ``t ≡βΣ u`` by comparing weak-head normal forms recursively."""
    if contains_hole(t) or contains_hole(u):
        raise ValueError("cannot compare terms containing holes")
    return _conv(sig, t, u, as_fuel(budget))


def _conv(sig, t, u, fuel) -> bool:
    if alpha_equal(t, u):
        return True
    t = _whnf(sig, t, fuel)
    u = _whnf(sig, u, fuel)
    match t, u:
        case Sort(a), Sort(b):
            return a == b
        case (Lam(x, a, b), Lam(y, c, d)) | (Pi(x, a, b), Pi(y, c, d)):
            if type(t) is not type(u) or not _conv(sig, a, c, fuel):
                return False
            z = x if x not in d.fv or x == y else fresh_name(x, b.fv | d.fv)
            return _conv(sig, rename_bound(x, b, z), rename_bound(y, d, z), fuel)
    h1, args1 = spine(t)
    h2, args2 = spine(u)
    if len(args1) != len(args2):
        return False
    match h1, h2:
        case Var(x), Var(y) if x == y:
            pass
        case Const(c), Const(d) if c == d:
            pass
        case _:
            return False
    return all(_conv(sig, a, b, fuel) for a, b in zip(args1, args2))


# -- one-step reducts (used by the property suites) -------------------------------


def one_step_reducts(sig: Signature, t: Term) -> list[Term]:
    """Every term reachable from ``t`` by one β- or rule-step at any position."""
    out: list[Term] = []
    head, args = spine(t)
    if isinstance(t, App) and isinstance(t.fun, Lam):
        out.append(substitute(t.fun.body, {t.fun.binder: t.arg}))
    if isinstance(head, Const):
        for rule in sig.rules_for(head.name):
            theta = match_rule(rule, t)
            if theta is not None:
                out.append(substitute(rule.rhs, theta))
    match t:
        case App(f, a):
            out += [App(f2, a) for f2 in one_step_reducts(sig, f)]
            out += [App(f, a2) for a2 in one_step_reducts(sig, a)]
        case Lam(x, a, b):
            out += [Lam(x, a2, b) for a2 in one_step_reducts(sig, a)]
            out += [Lam(x, a, b2) for b2 in one_step_reducts(sig, b)]
        case Pi(x, a, b):
            out += [Pi(x, a2, b) for a2 in one_step_reducts(sig, a)]
            out += [Pi(x, a, b2) for b2 in one_step_reducts(sig, b)]
    return out


def beta_normal(t: Term, budget=None) -> Term:
    """Full β-normal form (rewrite rules are not used); bounded by ``budget``."""
    if contains_hole(t):
        raise ValueError("cannot reduce a term containing a hole")
    return _beta_nf(t, as_fuel(budget))


def _beta_nf(t: Term, fuel: Fuel) -> Term:
    head, args = spine(t)
    while isinstance(head, Lam) and args:
        fuel.tick()
        head, args = spine(apps(substitute(head.body, {head.binder: args[0]}), *args[1:]))
    match head:
        case Lam(x, a, b):
            head = Lam(x, _beta_nf(a, fuel), _beta_nf(b, fuel))
        case Pi(x, a, b):
            head = Pi(x, _beta_nf(a, fuel), _beta_nf(b, fuel))
    return apps(head, *(_beta_nf(a, fuel) for a in args))
