"""Random well-typed terms for the property suites.

Generation is goal-directed: to inhabit a type, pick a variable or
constant whose type ends (after some arguments) in something that matches
the goal first-order, then fill the remaining arguments recursively.
Product goals are met with an abstraction.  Every judgment handed out has
been re-checked by the kernel, so generator bugs show up as low yield,
never as bogus test inputs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from pfk.errors import PfkError
from pfk.rewriting import beta_normal, whnf
from pfk.terms import (
    TYPE,
    App,
    Const,
    Lam,
    Pi,
    Sort,
    Term,
    Var,
    alpha_equal,
    apps,
    fresh_name,
    rename_bound,
    spine,
    substitute,
)
from pfk.typecheck import Context, Judgment, Theory, check_context, check_type, infer_type

NAMES = ("x", "y", "z", "n", "m", "h", "k")
_META = "?"  # pattern-variable prefix; cannot clash with real identifiers


class _Fail(Exception):
    pass


def _match(pat: Term, t: Term, metas: frozenset, theta: dict, bound: frozenset = frozenset()) -> bool:
    match pat:
        case Var(x) if x in metas:
            if t.fv & bound:
                return False
            if x in theta:
                return alpha_equal(theta[x], t)
            theta[x] = t
            return True
    if not (pat.fv & metas):
        return alpha_equal(pat, t)
    match pat, t:
        case App(f, a), App(g, b):
            return _match(f, g, metas, theta, bound) and _match(a, b, metas, theta, bound)
        case (Lam(x, a, b), Lam(y, c, d)) | (Pi(x, a, b), Pi(y, c, d)) if type(pat) is type(t):
            if not _match(a, c, metas, theta, bound):
                return False
            z = fresh_name("b", b.fv | d.fv | metas | bound)
            return _match(rename_bound(x, b, z), rename_bound(y, d, z), metas, theta, bound | {z})
    return False


@dataclass
class Sample:
    """A checked judgment ``ctx ⊢ term : type``."""

    context: Context
    term: Term
    type: Term

    @property
    def judgment(self) -> Judgment:
        return Judgment(self.context, self.term, self.type)


class Generator:
    def __init__(self, theory: Theory, seed: int = 0, max_depth: int = 3, budget=2_000, redex_rate: float = 0.2):
        self.theory = theory
        self.rng = random.Random(seed)
        self.max_depth = max_depth
        self.budget = budget
        self.redex_rate = redex_rate
        self.constants = [c for c in theory.constants if not theory.is_defined(c)]
        self._tele_cache: dict = {}

    # -- helpers ----------------------------------------------------------------

    def _whnf(self, t: Term) -> Term:
        return whnf(self.theory, beta_normal(t, self.budget), self.budget)

    def _binder(self, ctx: Context, avoid) -> str:
        if self.rng.random() < 0.05:
            pool = [x for x in NAMES if x not in avoid]
            if pool:
                return self.rng.choice(pool)
        base = self.rng.choice(NAMES)
        return fresh_name(base, set(ctx.names) | set(avoid)) if base in ctx or base in avoid else base

    def _type_of_head(self, ctx: Context, h: Term) -> Term:
        return ctx.lookup(h.name) if isinstance(h, Var) else self.theory.lookup(h.name)

    # -- generation -----------------------------------------------------------------

    def inhabit(self, ctx: Context, goal: Term, depth: int) -> Term:
        g = beta_normal(goal, self.budget)
        w = self._whnf(g)
        if isinstance(w, Sort):
            if not w.is_type:
                return self.kind(ctx, depth)
            return self.type_(ctx, depth)
        if depth > 0 and self.rng.random() < self.redex_rate:
            return self._redex(ctx, goal, depth)
        if isinstance(w, Pi):
            x = self._binder(ctx, w.cod.fv)
            return Lam(x, w.dom, self.inhabit(ctx.extend(x, w.dom), rename_bound(w.binder, w.cod, x), depth))
        return self._neutral(ctx, g, depth)

    def _redex(self, ctx: Context, goal: Term, depth: int) -> Term:
        a = self.type_(ctx, depth - 1)
        y = self._binder(ctx, goal.fv | a.fv)
        arg = self.inhabit(ctx, a, depth - 1)
        body = self.inhabit(ctx.extend(y, a), goal, depth - 1)
        return App(Lam(y, a, body), arg)

    def _neutral(self, ctx: Context, goal: Term, depth: int) -> Term:
        heads = [Var(x) for x in dict.fromkeys(reversed(ctx.names))] + [Const(c) for c in self.constants]
        self.rng.shuffle(heads)
        # prefer heads that need no further search
        heads.sort(key=lambda h: 0 if isinstance(h, Var) else 1 if depth > 0 else 2)
        for h in heads:
            try:
                return self._apply(ctx, h, goal, depth)
            except (_Fail, PfkError):
                continue
        raise _Fail(f"no inhabitant found for {goal}")

    def _telescope(self, ty: Term) -> list:
        """Prefixes ``(metas, domains, result)`` of a head type, shortest first."""
        out, metas, doms, rest = [], [], [], ty
        while True:
            out.append((tuple(metas), tuple(doms), beta_normal(rest, self.budget)))
            w = self._whnf(rest)
            if not isinstance(w, Pi) or len(metas) >= 8:
                return out
            m = f"{_META}{len(metas)}"
            metas.append(m)
            doms.append(w.dom)
            rest = substitute(w.cod, {w.binder: Var(m)})

    def _apply(self, ctx: Context, head: Term, goal: Term, depth: int) -> Term:
        if isinstance(head, Const):
            tele = self._tele_cache.get(head.name)
            if tele is None:
                tele = self._tele_cache[head.name] = self._telescope(self.theory.lookup(head.name))
        else:
            tele = self._telescope(ctx.lookup(head.name))
        for metas, doms, result in tele:
            theta: dict = {}
            if _match(result, goal, frozenset(metas), theta):
                break
        else:
            raise _Fail("no match")
        if metas and depth <= 0 and any(m not in theta for m in metas):
            raise _Fail("out of depth")
        args: list[Term] = []
        sub: dict = {}
        for m, dom in zip(metas, doms):
            arg = theta[m] if m in theta else self.inhabit(ctx, substitute(dom, sub), depth - 1)
            sub[m] = arg
            args.append(arg)
        return apps(head, *args)

    def type_(self, ctx: Context, depth: int) -> Term:
        r = self.rng.random()
        if depth <= 0:
            r *= 0.7
        if r < 0.35:
            return App(Const("El"), self.inhabit(ctx, Const("Set"), depth - 1))
        if r < 0.7:
            return App(Const("Prf"), self.inhabit(ctx, App(Const("El"), Const("o")), depth - 1))
        a = self.type_(ctx, depth - 1)
        x = self._binder(ctx, a.fv)
        return Pi(x, a, self.type_(ctx.extend(x, a), depth - 1))

    def kind(self, ctx: Context, depth: int) -> Term:
        if depth <= 0 or self.rng.random() < 0.5:
            return TYPE
        a = self.type_(ctx, depth - 1)
        x = self._binder(ctx, a.fv)
        return Pi(x, a, self.kind(ctx.extend(x, a), depth - 1))

    # -- checked samples ---------------------------------------------------------------

    def context(self, size: int | None = None) -> Context:
        if size is None:
            size = self.rng.randint(0, 3)
        ctx = Context()
        for _ in range(size):
            try:
                a = self.type_(ctx, 1)
            except (_Fail, PfkError):
                continue
            ctx = ctx.extend(self._binder(ctx, ()), a)
        return ctx

    def try_sample(self, ctx: Context | None = None, goal: Term | None = None, depth: int | None = None) -> Sample | None:
        depth = self.max_depth if depth is None else depth
        ctx = self.context() if ctx is None else ctx
        try:
            check_context(self.theory, ctx, self.budget)
            if goal is None:
                goal = self.type_(ctx, 1) if self.rng.random() < 0.85 else self.kind(ctx, 1)
            t = self.inhabit(ctx, goal, depth)
            check_type(self.theory, ctx, t, goal, self.budget)
        except (_Fail, PfkError, RecursionError):
            return None
        return Sample(ctx, t, goal)

    def sample(self, tries: int = 200, **kw) -> Sample:
        for _ in range(tries):
            s = self.try_sample(**kw)
            if s is not None:
                return s
        raise RuntimeError("generator made no progress")

    def samples(self, n: int, **kw):
        for _ in range(n):
            yield self.sample(**kw)

    def substitution_instance(self, tries: int = 500):
        """``(Γ0, z, C, w, t)`` with ``Γ0 ⊢ w : C`` and ``Γ0, z : C ⊢ t``, z free in t."""
        for _ in range(tries):
            ctx0 = self.context(self.rng.randint(0, 2))
            try:
                check_context(self.theory, ctx0, self.budget)
                c = self.type_(ctx0, 1)
                w = self.inhabit(ctx0, c, 2)
                check_type(self.theory, ctx0, w, c, self.budget)
            except (_Fail, PfkError, RecursionError):
                continue
            z = fresh_name("z", set(ctx0.names)) if "z" in ctx0 else "z"
            ctx = ctx0.extend(z, c)
            s = self.try_sample(ctx=ctx)
            if s is not None and z in s.term.fv:
                return ctx0, z, c, w, s
        raise RuntimeError("generator made no progress")


def infer_sample_type(theory: Theory, s: Sample, budget=None) -> Term:
    return infer_type(theory, s.context, s.term, budget)
