"""Randomised checks of the translation's meta-properties over the
nat → int interpretation: substitution commutation, preservation of
conversion, transfer soundness and the consistency witness transform."""

from __future__ import annotations

import dataclasses

from pfk.corpus import int_theory, nat_theory, nat_to_int_params
from pfk.errors import PfkError
from pfk.gen import Generator
from pfk.interp import (
    Interpretation,
    KindWithHole,
    consistency_transform,
    full_param_map,
    plus_name,
    star_name,
    transfer_judgment,
    transfer_plus_judgment,
)
from pfk.rewriting import convertible, one_step_reducts
from pfk.terms import KIND, App, Const, Lam, Pi, Var, alpha_equal, arrow, fresh_name, substitute
from pfk.typecheck import Context, check_type


@dataclasses.dataclass
class PropertyReport:
    name: str
    total: int = 0
    failures: list = dataclasses.field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.total > 0 and not self.failures

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.total - len(self.failures)}/{self.total}"


def _setup(seed):
    src, tgt = nat_theory(), int_theory()
    params = full_param_map(src, nat_to_int_params())
    return src, tgt, params, Generator(src, seed=seed)


def substitution_commutes(n: int = 1000, seed: int = 0) -> PropertyReport:
    """``(t[z←w])* ≡α t*[z*←w*, z+←w+]`` and likewise for plus."""
    src, _, params, gen = _setup(seed)
    rep = PropertyReport("substitution commutes with star/plus")
    while rep.total < n:
        ctx0, z, _c, w, s = gen.substitution_instance()
        rep.total += 1
        interp = Interpretation(src, params)
        ctx = s.context
        try:
            w_star, w_plus = interp.star(ctx0, w), interp.plus_term(ctx0, w)
            sub = {star_name(z): w_star, plus_name(z): w_plus}
            t_sub = substitute(s.term, {z: w})
            lhs = interp.star(ctx0, t_sub)
            rhs = substitute(interp.star(ctx, s.term), sub)
            if not alpha_equal(lhs, rhs):
                rep.failures.append(("star", s.term, w))
                continue
            lp, rp = interp.plus(ctx0, t_sub), interp.plus(ctx, s.term)
            if isinstance(lp, KindWithHole) != isinstance(rp, KindWithHole):
                rep.failures.append(("plus shape", s.term, w))
                continue
            lhs = lp.body if isinstance(lp, KindWithHole) else lp.term
            rhs = substitute(rp.body if isinstance(rp, KindWithHole) else rp.term, sub)
            if not alpha_equal(lhs, rhs):
                rep.failures.append(("plus", s.term, w))
        except PfkError as e:
            rep.failures.append(("error", s.term, e))
    return rep


def _plus_comparable(r, fill):
    return r.fill(fill) if isinstance(r, KindWithHole) else r.term


def conversion_preserved(n: int = 500, seed: int = 0) -> PropertyReport:
    """For a one-step reduct ``B`` of ``A``: ``A* ≡ B*`` and ``A+ ≡ B+`` in the target."""
    src, tgt, params, gen = _setup(seed)
    gen.redex_rate = 0.4
    rep = PropertyReport("one-step reduction preserved by star/plus")
    while rep.total < n:
        s = gen.sample()
        reducts = one_step_reducts(src, s.term)
        if not reducts:
            continue
        b = gen.rng.choice(reducts)
        rep.total += 1
        interp = Interpretation(src, params)
        try:
            tctx = interp.translate_context(s.context)
            hole = Var(fresh_name("X", set(tctx.names)))
            a_star, b_star = interp.star(s.context, s.term), interp.star(s.context, b)
            a_plus = _plus_comparable(interp.plus(s.context, s.term), hole)
            b_plus = _plus_comparable(interp.plus(s.context, b), hole)
            if not convertible(tgt, a_star, b_star):
                rep.failures.append(("star", s.term, b))
            elif not convertible(tgt, a_plus, b_plus):
                rep.failures.append(("plus", s.term, b))
        except PfkError as e:
            rep.failures.append(("error", s.term, e))
    return rep


def transfer_sound(n: int = 100, seed: int = 0) -> PropertyReport:
    """Generated source judgments re-check in the target after transfer."""
    src, tgt, params, gen = _setup(seed)
    rep = PropertyReport("generated judgments transfer")
    for s in gen.samples(n):
        rep.total += 1
        try:
            transfer_judgment(src, tgt, params, s.judgment)
            if s.type != KIND:
                transfer_plus_judgment(src, tgt, params, s.judgment)
        except PfkError as e:
            rep.failures.append((s.judgment, e))
    return rep


def consistency_witness() -> PropertyReport:
    """Under a hypothesised translated inconsistency witness, the transform checks,
    and so does applying the result to a closed proposition."""
    tgt = int_theory()
    rep = PropertyReport("consistency witness transform", total=2)
    p = star_name("P")
    el_o = App(Const("El"), Const("o"))
    prf = App(Const("Prf"), Var(p))
    ctx = Context().extend("h", Pi(p, el_o, Pi(plus_name("P"), arrow(prf, prf), prf)))
    try:
        witness, _ = consistency_transform(tgt, "h", ctx)
    except PfkError as e:
        rep.failures.append(e)
        rep.failures.append("skipped")
        return rep
    try:
        everything = App(App(Const("forall_"), Const("o")), Lam("x", el_o, Var("x")))
        check_type(tgt, ctx, App(witness, everything), App(Const("Prf"), everything))
    except PfkError as e:
        rep.failures.append(e)
    return rep


def run_all(seed: int = 0, scale: float = 1.0) -> list[PropertyReport]:
    k = lambda n: max(1, int(n * scale))
    return [
        substitution_commutes(k(1000), seed),
        conversion_preserved(k(500), seed),
        transfer_sound(k(100), seed),
        consistency_witness(),
    ]
