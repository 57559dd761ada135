"""Star/plus interpretation of terms and theories, interpretation
obligations, proof transfer and the consistency witness transform.

A source variable ``x`` is represented in the target by the pair
``x'star`` / ``x'plus``.  Source names never end in ``'star`` or ``'plus``
unless they already carry the marker, and suffixing is injective, so the
derived names cannot collide with each other or with the (derived) free
variables of any translated term.
"""

from __future__ import annotations

import dataclasses
from typing import Iterable, Mapping, NamedTuple

from pfk.errors import (
    BudgetExhausted,
    InterpError,
    KernelError,
    KindPlusUnsupported,
    MissingParameter,
    PfkError,
    TransferFailure,
    TypeMismatch,
    UnboundVariable,
)
from pfk.rewriting import ReductionBudget, RewriteRule, beta_normal, convertible
from pfk.terms import (
    HOLE,
    KIND,
    MARKER,
    TYPE,
    App,
    Const,
    Hole,
    Lam,
    Pi,
    Sort,
    Term,
    Var,
    apps,
    arrow,
    contains_hole,
    fresh_name,
    rename_bound,
    substitute,
)
from pfk.typecheck import (
    ConstDecl,
    Context,
    Elaborator,
    Judgment,
    Theory,
    check_context,
    check_type,
    infer_type,
    sort_of,
)

STAR_SUFFIX = MARKER + "star"
PLUS_SUFFIX = MARKER + "plus"


def star_name(x: str) -> str:
    return x + STAR_SUFFIX


def plus_name(x: str) -> str:
    return x + PLUS_SUFFIX


class Parameter(NamedTuple):
    star: Term
    plus: Term


class ParamMap(Mapping):
    """Source constant name -> :class:`Parameter` (target terms)."""

    def __init__(self, entries: Mapping[str, Parameter] | None = None):
        self._entries = dict(entries or {})
        for name, p in self._entries.items():
            if contains_hole(p.star) or contains_hole(p.plus):
                raise ValueError(f"parameter for {name} contains a hole")

    def __getitem__(self, name):
        return self._entries[name]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def merged(self, other: Mapping[str, Parameter]) -> "ParamMap":
        return ParamMap({**self._entries, **other})

    def without(self, name: str) -> "ParamMap":
        return ParamMap({k: v for k, v in self._entries.items() if k != name})

    @classmethod
    def from_raw(cls, raw, source: Theory | None = None) -> "ParamMap":
        """Resolve a parsed ``.pfm`` map, checking it against ``source``.

        Every axiomatic user constant of ``source`` needs both a star and a
        plus entry; defined constants may be omitted.
        """
        from pfk.prelude import PRELUDE_CONSTANTS

        entries = {}
        for name, r in raw.items():
            if name in PRELUDE_CONSTANTS and source is not None and source.prelude_included:
                raise InterpError(f"{name} is a prelude constant; its parameters are built in", r.pos)
            if source is not None and name not in source:
                raise InterpError(f"parameter given for unknown source constant {name}", r.pos)
            missing = [w for w in ("star", "plus") if getattr(r, w) is None]
            if missing:
                raise MissingParameter(name, f"no {name}.{missing[0]} parameter", r.pos)
            entries[name] = Parameter(r.star, r.plus)
        pm = cls(entries)
        if source is not None:
            for name in axiomatic_constants(source):
                if name not in pm:
                    raise MissingParameter(name)
        return pm


def axiomatic_constants(theory: Theory, include_prelude=False) -> list[str]:
    entries = theory.entries if include_prelude else theory.user_entries
    return [e.name for e in entries if isinstance(e, ConstDecl) and not theory.is_defined(e.name)]


def full_param_map(source: Theory, params: Mapping[str, Parameter]) -> ParamMap:
    """Add the built-in prelude parameters when ``source`` includes the prelude."""
    if not source.prelude_included:
        return params if isinstance(params, ParamMap) else ParamMap(params)
    from pfk.prelude import prelude_param_map

    return prelude_param_map().merged(params)


# -- plus results ------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class PlainTerm:
    term: Term


@dataclasses.dataclass(frozen=True)
class KindWithHole:
    """A kind with exactly one hole; :meth:`fill` plugs a term into it."""

    body: Term

    def fill(self, t: Term) -> Term:
        return fill_hole(self.body, t)


PlusResult = PlainTerm | KindWithHole


def fill_hole(body: Term, t: Term) -> Term:
    """Replace the hole in ``body`` by ``t`` without capturing ``t``'s free variables."""
    fvt = t.fv

    def go(u: Term) -> Term:
        match u:
            case Hole():
                return t
            case App(f, a):
                return App(go(f) if contains_hole(f) else f, go(a) if contains_hole(a) else a)
            case Lam(x, a, b) | Pi(x, a, b):
                if contains_hole(a):
                    a = go(a)
                if contains_hole(b):
                    if x in fvt:
                        x2 = fresh_name(x, fvt | b.fv)
                        b = rename_bound(x, b, x2)
                        x = x2
                    b = go(b)
                return type(u)(x, a, b)
        return u

    return go(body)


# -- the translation --------------------------------------------------------------------


def _pick(name: str, avoid) -> str:
    return name if name not in avoid else fresh_name(name, avoid)


class Interpretation:
    """Translation of source terms given a parameter map.

    ``params`` must already include the prelude parameters when the source
    includes the prelude (see :func:`full_param_map`).  Parameters of
    defined constants are derived from their bodies on demand.
    """

    def __init__(self, source: Theory, params: Mapping[str, Parameter], budget=None):
        self.source = source
        self.params = params
        self.budget = budget if budget is not None else ReductionBudget()
        self._derived: dict[str, Parameter] = {}
        self._sorts: dict = {}

    def param(self, name: str) -> Parameter:
        if name in self.params:
            return self.params[name]
        if name in self._derived:
            return self._derived[name]
        if self.source.is_defined(name):
            body = self.source.definitions[name]
            p = Parameter(self.star(Context(), body), self.plus_term(Context(), body))
            self._derived[name] = p
            return p
        raise MissingParameter(name)

    def sort(self, ctx: Context, a: Term) -> Sort:
        key = (ctx.entries, a)
        if key not in self._sorts:
            self._sorts[key] = sort_of(self.source, ctx, a, self.budget)
        return self._sorts[key]

    def _open(self, ctx: Context, x: str, a: Term, body: Term):
        if x in ctx:
            x2 = fresh_name(x, set(ctx.names) | body.fv)
            body = rename_bound(x, body, x2)
            x = x2
        return x, body, ctx.extend(x, a)

    def _binder_types(self, ctx, x, a):
        xs = star_name(x)
        return xs, plus_name(x), self.star(ctx, a), App(self.plus_term(ctx, a), Var(xs))

    def star(self, ctx: Context, t: Term) -> Term:
        match t:
            case Sort(_):
                return t
            case Var(x):
                if x not in ctx:
                    raise UnboundVariable(f"unbound variable {x}")
                return Var(star_name(x))
            case Const(c):
                return self.param(c).star
            case App(f, u):
                return apps(self.star(ctx, f), self.star(ctx, u), self.plus_term(ctx, u))
            case Lam(x, a, b) | Pi(x, a, b):
                x, b, inner = self._open(ctx, x, a, b)
                xs, xp, a_star, a_plus = self._binder_types(ctx, x, a)
                node = type(t)
                return node(xs, a_star, node(xp, a_plus, self.star(inner, b)))
        raise ValueError(f"cannot translate {t!r}")

    def plus(self, ctx: Context, t: Term) -> PlusResult:
        match t:
            case Sort(_):
                if t.is_type:
                    return KindWithHole(arrow(HOLE, TYPE))
                raise KindPlusUnsupported("KIND has no plus translation")
            case Var(x):
                if x not in ctx:
                    raise UnboundVariable(f"unbound variable {x}")
                return PlainTerm(Var(plus_name(x)))
            case Const(c):
                return PlainTerm(self.param(c).plus)
            case App(f, u):
                return PlainTerm(apps(self.plus_term(ctx, f), self.star(ctx, u), self.plus_term(ctx, u)))
            case Lam(x, a, b):
                x, b, inner = self._open(ctx, x, a, b)
                xs, xp, a_star, a_plus = self._binder_types(ctx, x, a)
                return PlainTerm(Lam(xs, a_star, Lam(xp, a_plus, self.plus_term(inner, b))))
            case Pi(x, a, b):
                x, b, inner = self._open(ctx, x, a, b)
                xs, xp, a_star, a_plus = self._binder_types(ctx, x, a)
                if self.sort(inner, b).is_type:
                    b_plus = self.plus_term(inner, b)
                    pi_star = Pi(xs, a_star, Pi(xp, a_plus, self.star(inner, b)))
                    f = _pick("f", pi_star.fv | a_star.fv | a_plus.fv | b_plus.fv | {xs, xp})
                    body = Pi(xs, a_star, Pi(xp, a_plus, App(b_plus, apps(Var(f), Var(xs), Var(xp)))))
                    return PlainTerm(Lam(f, pi_star, body))
                b_plus = self.plus(inner, b)
                assert isinstance(b_plus, KindWithHole)
                body = b_plus.fill(apps(HOLE, Var(xs), Var(xp)))
                return KindWithHole(Pi(xs, a_star, Pi(xp, a_plus, body)))
        raise ValueError(f"cannot translate {t!r}")

    def plus_term(self, ctx: Context, t: Term) -> Term:
        r = self.plus(ctx, t)
        if not isinstance(r, PlainTerm):
            raise KindPlusUnsupported(f"the plus translation of {t} is a kind with a hole")
        return r.term

    def plus_applied(self, ctx: Context, a: Term, t_star: Term) -> Term:
        """``A+ t*`` when A is a type, ``A+{t*}`` when A is a kind."""
        r = self.plus(ctx, a)
        if isinstance(r, KindWithHole):
            return r.fill(t_star)
        return App(r.term, t_star)

    def translate_context(self, ctx: Context) -> Context:
        out = Context()
        prefix = Context()
        for x, a in Context.of(ctx).entries:
            xs, xp = star_name(x), plus_name(x)
            if xs in out or xp in out:
                raise InterpError(f"derived names for {x} collide")
            a_star = self.star(prefix, a)
            out = out.extend(xs, a_star).extend(xp, self.plus_applied(prefix, a, Var(xs)))
            prefix = prefix.extend(x, a)
        return out


# -- public operations on terms -------------------------------------------------------------


def _prepare(src: Theory, params, ctx, t: Term, budget):
    ctx = Context.of(ctx)
    if contains_hole(t):
        raise ValueError("cannot translate a term containing a hole")
    if t != KIND:
        infer_type(src, ctx, t, budget)
    return Interpretation(src, full_param_map(src, params), budget), ctx


def star(src: Theory, params, ctx, t: Term, budget=None) -> Term:
    """``t*`` for a term well-typed in ``ctx`` over ``src``."""
    interp, ctx = _prepare(src, params, ctx, t, budget)
    return interp.star(ctx, t)


def plus(src: Theory, params, ctx, t: Term, budget=None) -> PlusResult:
    """``t+``: a plain term, or a kind with a hole when ``t`` is itself a kind."""
    interp, ctx = _prepare(src, params, ctx, t, budget)
    return interp.plus(ctx, t)


def translate_context(src: Theory, params, ctx, budget=None) -> Context:
    ctx = Context.of(ctx)
    check_context(src, ctx, budget)
    return Interpretation(src, full_param_map(src, params), budget).translate_context(ctx)


# -- obligations --------------------------------------------------------------------------------


STAR_TYPING = "StarTyping"
PLUS_TYPING = "PlusTyping"
RULE_STAR_CONV = "RuleStarConv"
RULE_PLUS_CONV = "RulePlusConv"


@dataclasses.dataclass
class Obligation:
    kind: str
    subject: str
    statement: object = None
    status: str = "pending"
    cause: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _run(ob: Obligation, check) -> Obligation:
    try:
        check()
    except BudgetExhausted as e:
        ob.status, ob.cause = "fail", f"BudgetExhausted: {e}"
    except (KernelError, InterpError) as e:
        ob.status, ob.cause = "fail", f"{e.kind}: {e}"
    else:
        ob.status = "pass"
    return ob


def check_interpretation(
    src: Theory, tgt: Theory, params, budget=None, include_prelude: bool = False
) -> list[Obligation]:
    """Emit and check the interpretation obligations of ``src`` in ``tgt``.

    Only the user part of ``src`` is examined unless ``include_prelude``.
    A missing parameter aborts with :class:`MissingParameter`; every other
    failure is recorded on its obligation.
    """
    if budget is None:
        budget = ReductionBudget()
    params = full_param_map(src, params)
    for name in axiomatic_constants(src, include_prelude):
        if name not in params:
            raise MissingParameter(name)
    entries = src.entries if include_prelude else src.user_entries
    obligations = []
    for entry in entries:
        if isinstance(entry, ConstDecl):
            obligations += _constant_obligations(src, tgt, params, entry, budget)
        else:
            obligations += _rule_obligations(src, tgt, params, entry, budget)
    return obligations


def _constant_obligations(src, tgt, params, decl: ConstDecl, budget):
    interp = Interpretation(src, params, budget)
    empty = Context()
    c, a = decl.name, decl.type
    star_ob = Obligation(STAR_TYPING, c)
    plus_ob = Obligation(PLUS_TYPING, c)

    def star_check():
        c_star, a_star = interp.param(c).star, interp.star(empty, a)
        star_ob.statement = Judgment(empty, c_star, a_star)
        check_type(tgt, empty, c_star, a_star, budget)

    def plus_check():
        p = interp.param(c)
        expected = interp.plus_applied(empty, a, p.star)
        plus_ob.statement = Judgment(empty, p.plus, expected)
        check_type(tgt, empty, p.plus, expected, budget)

    return [_run(star_ob, star_check), _run(plus_ob, plus_check)]


def rule_label(rule: RewriteRule) -> str:
    from pfk.surface import print_term

    return rule.name or f"{print_term(rule.lhs)} --> {print_term(rule.rhs)}"


def _rule_obligations(src, tgt, params, rule: RewriteRule, budget):
    interp = Interpretation(src, params, budget)
    label = rule_label(rule)
    obs = [Obligation(RULE_STAR_CONV, label), Obligation(RULE_PLUS_CONV, label)]
    ctx = Context(rule.context)

    def close():
        # per-obligation scratch extension: rule variables become constants
        tctx = interp.translate_context(ctx)
        check_context(tgt, tctx, budget)
        taken = set(tgt.constants)
        sub, decls = {}, []
        for name, ty in tctx.entries:
            cname = _pick(name, taken)
            taken.add(cname)
            decls.append(ConstDecl(cname, substitute(ty, sub)))
            sub[name] = Const(cname)
        return tgt.extend(*decls), sub

    def conv_check(ob, translate):
        def check():
            scratch, sub = close()
            lhs = substitute(translate(ctx, rule.lhs), sub)
            rhs = substitute(translate(ctx, rule.rhs), sub)
            ob.statement = (lhs, rhs)
            if not convertible(scratch, lhs, rhs, budget):
                raise TypeMismatch(f"{ob.kind}: translated sides are not convertible", got=lhs, expected=rhs)

        return check

    _run(obs[0], conv_check(obs[0], interp.star))
    _run(obs[1], conv_check(obs[1], interp.plus_term))
    return obs


# -- transfer ---------------------------------------------------------------------------------------


def _source_checked(src, j: Judgment, budget):
    check_context(src, j.context, budget)
    check_type(src, j.context, j.subject, j.type, budget)


def transfer_judgment(src: Theory, tgt: Theory, params, j: Judgment, budget=None) -> Judgment:
    """Translate ``Γ ⊢ t : A`` to ``Γ*,+ ⊢ t* : A*`` and re-check it in ``tgt``."""
    ctx = Context.of(j.context)
    j = Judgment(ctx, j.subject, j.type)
    _source_checked(src, j, budget)
    interp = Interpretation(src, full_param_map(src, params), budget)
    out = Judgment(interp.translate_context(ctx), interp.star(ctx, j.subject), interp.star(ctx, j.type))
    _recheck(tgt, out, budget)
    return out


def transfer_plus_judgment(src: Theory, tgt: Theory, params, j: Judgment, budget=None) -> Judgment:
    """``Γ*,+ ⊢ t+ : A+ t*`` (A a type) or ``Γ*,+ ⊢ t+ : A+{t*}`` (A a kind), re-checked."""
    ctx = Context.of(j.context)
    j = Judgment(ctx, j.subject, j.type)
    _source_checked(src, j, budget)
    if j.type == KIND:
        raise KindPlusUnsupported("no plus judgment for a subject whose type is KIND")
    interp = Interpretation(src, full_param_map(src, params), budget)
    t_star = interp.star(ctx, j.subject)
    out = Judgment(
        interp.translate_context(ctx), interp.plus_term(ctx, j.subject), interp.plus_applied(ctx, j.type, t_star)
    )
    _recheck(tgt, out, budget)
    return out


def _recheck(tgt, j: Judgment, budget):
    try:
        check_context(tgt, j.context, budget)
        check_type(tgt, j.context, j.subject, j.type, budget)
    except KernelError as e:
        raise TransferFailure(f"translated judgment does not check in the target: {e}", cause=e) from e


@dataclasses.dataclass
class TransferredItem:
    name: str
    kind: str
    source: object
    emitted: list


def transfer_items(src: Theory, tgt: Theory, params, items: Iterable, budget=None, normalize: bool = True):
    """Transport the declarations, definitions and assertions of a theorem file.

    With ``normalize`` the emitted terms are put in β-normal form, which is
    convertible with the raw translation and far easier to read.

    Each item is first elaborated over ``src`` (a failure there is a plain
    kernel error), then translated; the translation is elaborated over
    ``tgt``, which grows as items are emitted.  A re-check failure raises
    :class:`TransferFailure`.  Returns ``(records, final target theory)``.
    """
    from pfk import surface

    params = full_param_map(src, params)
    nf = (lambda t: beta_normal(t, budget)) if normalize else (lambda t: t)
    src_el = Elaborator(src, budget)
    tgt_el = Elaborator(tgt, budget)
    empty = Context()
    records = []
    for item in items:
        src_el.add_item(item)
        interp = Interpretation(src_el.theory, params, budget)
        match item:
            case surface.Decl(c, a, pos) | surface.Def(c, a, _, pos):
                taken = set(tgt_el.theory.constants)
                cs = _pick(star_name(c), taken)
                cp = _pick(plus_name(c), taken | {cs})
                a_star = nf(interp.star(empty, a))
                a_plus = nf(interp.plus_applied(empty, a, Const(cs)))
                if isinstance(item, surface.Def):
                    emitted = [
                        surface.Def(cs, a_star, nf(interp.star(empty, item.body)), pos),
                        surface.Def(cp, a_plus, nf(interp.plus_term(empty, item.body)), pos),
                    ]
                else:
                    emitted = [surface.Decl(cs, a_star, pos), surface.Decl(cp, a_plus, pos)]
                params = params.merged({c: Parameter(Const(cs), Const(cp))})
                kind = type(item).__name__
            case surface.AssertType(t, a, pos):
                emitted = [surface.AssertType(nf(interp.star(empty, t)), nf(interp.star(empty, a)), pos)]
                c, kind = surface.item_name(item), "AssertType"
            case surface.AssertConv(t, u, pos):
                emitted = [
                    surface.AssertConv(nf(interp.star(empty, t)), nf(interp.star(empty, u)), pos),
                    surface.AssertConv(nf(interp.plus_term(empty, t)), nf(interp.plus_term(empty, u)), pos),
                ]
                c, kind = surface.item_name(item), "AssertConv"
            case _:
                raise InterpError("theorem files may only contain declarations, definitions and assertions", item.pos)
        for e in emitted:
            try:
                tgt_el.add_item(e)
            except KernelError as err:
                raise TransferFailure(f"{c}: translation does not check in the target: {err}", cause=err) from err
        records.append(TransferredItem(c, kind, item, emitted))
    return records, tgt_el.theory


# -- relative consistency ------------------------------------------------------------------------------


def consistency_transform(tgt: Theory, t_name: str, ctx=None, budget=None) -> tuple[Term, Judgment]:
    """Turn a witness of the translated inconsistency type into one of ``Π(P : El o). Prf P``.

    ``t_name`` is a constant of ``tgt`` or a hypothesis of ``ctx`` of type
    ``Π(P* : El o)(P+ : Prf P* -> Prf P*). Prf P*``.
    """
    ctx = Context.of(ctx)
    el_o = App(Const("El"), Const("o"))
    avoid = set(ctx.names)
    p = _pick(star_name("P"), avoid)
    pp = _pick(plus_name("P"), avoid | {p})
    prf_p = App(Const("Prf"), Var(p))
    expected = Pi(p, el_o, Pi(pp, arrow(prf_p, prf_p), prf_p))
    head = Var(t_name) if t_name in ctx else Const(t_name)
    actual = infer_type(tgt, ctx, head, budget)
    if not convertible(tgt, actual, expected, budget):
        raise TypeMismatch(f"{t_name} has type {actual}, expected {expected}", got=actual, expected=expected)
    x = _pick("x", avoid | {p})
    witness = Lam(p, el_o, apps(head, Var(p), Lam(x, prf_p, Var(x))))
    goal = Pi(p, el_o, prf_p)
    check_type(tgt, ctx, witness, goal, budget)
    return witness, Judgment(ctx, witness, goal)
