import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfk.corpus import int_theory, nat_theory, nat_to_int_params
from pfk.errors import KindPlusUnsupported, MissingParameter, TransferFailure, TypeMismatch
from pfk.gen import Generator
from pfk.interp import (
    Interpretation,
    KindWithHole,
    ParamMap,
    Parameter,
    PlainTerm,
    check_interpretation,
    consistency_transform,
    fill_hole,
    full_param_map,
    plus,
    plus_name,
    star,
    star_name,
    transfer_judgment,
    transfer_plus_judgment,
    translate_context,
)
from pfk.prelude import prelude_param_map, prelude_signature
from pfk.rewriting import convertible
from pfk.surface import parse_term
from pfk.terms import HOLE, KIND, TYPE, App, Const, Lam, Pi, Var, alpha_equal, arrow, contains_hole
from pfk.typecheck import Context, Judgment, infer_type

NAT, INT = nat_theory(), int_theory()
PARAMS = nat_to_int_params()
EMPTY = Context()


def nat_ctx(*entries):
    ctx = Context()
    for x, a in entries:
        ctx = ctx.extend(x, parse_term(a, list(ctx.names)))
    return ctx


def test_derived_names():
    assert star_name("x") == "x'star" and plus_name("x") == "x'plus"
    assert len({star_name("x"), plus_name("x"), star_name("x'"), plus_name("x'")}) == 4


def test_type_translations():
    assert star(NAT, PARAMS, EMPTY, TYPE) == TYPE
    assert plus(NAT, PARAMS, EMPTY, TYPE) == KindWithHole(arrow(HOLE, TYPE))
    with pytest.raises(KindPlusUnsupported):
        Interpretation(NAT, full_param_map(NAT, PARAMS)).plus(EMPTY, KIND)


def test_application_case():
    ctx = nat_ctx(("f", "El nat -> El nat"), ("n", "El nat"))
    assert star(NAT, PARAMS, ctx, parse_term("f n", ["f", "n"])) == App(
        App(Var("f'star"), Var("n'star")), Var("n'plus")
    )
    assert plus(NAT, PARAMS, ctx, parse_term("f n", ["f", "n"])) == PlainTerm(
        App(App(Var("f'plus"), Var("n'star")), Var("n'plus"))
    )


def test_el_plus_is_the_prelude_parameter():
    expected = parse_term(r"\ (us : Set). \ (up : El us -> El o). \ (x : El us). Prf (up x)")
    assert plus(NAT, PARAMS, EMPTY, Const("El")) == PlainTerm(expected)


def test_pi_plus_over_a_type():
    t = parse_term("(x : El nat) -> El nat")
    r = plus(NAT, PARAMS, EMPTY, t)
    assert isinstance(r, PlainTerm)
    f = r.term
    assert isinstance(f, Lam)
    assert alpha_equal(f.ann, star(NAT, PARAMS, EMPTY, t))
    # Π(x* : A*)(x+ : A+ x*). B+ (f x* x+)
    inner = f.body.cod.cod
    assert inner.arg == App(App(Var(f.binder), Var("x'star")), Var("x'plus"))


def test_pi_plus_over_a_kind_has_a_hole():
    t = parse_term("El nat -> TYPE")
    r = plus(NAT, PARAMS, EMPTY, t)
    assert isinstance(r, KindWithHole)
    filled = r.fill(Const("F"))
    assert not contains_hole(filled)


def test_fill_hole_avoids_capture():
    body = Pi("x", Const("A"), App(HOLE, Var("x")))
    out = fill_hole(body, Var("x"))
    assert isinstance(out, Pi) and out.binder != "x"
    assert out.cod == App(Var("x"), Var(out.binder))


def test_theorem_statement_star():
    t = parse_term("(x : El nat) -> Prf (geq_n (succ_n x) 0_n)")
    expected = parse_term("(x : El int) -> Prf (geq_i x 0_i) -> Prf (geq_i (succ_i x) 0_i)")
    assert convertible(INT, star(NAT, PARAMS, EMPTY, t), expected)


def test_translate_context():
    assert translate_context(NAT, PARAMS, EMPTY) == EMPTY
    out = translate_context(NAT, PARAMS, nat_ctx(("x", "El nat")))
    (xs, a), (xp, b) = out.entries
    assert (xs, xp) == ("x'star", "x'plus")
    assert convertible(INT, a, parse_term("El int"))
    assert convertible(INT, b, parse_term("Prf (geq_i x'star 0_i)", ["x'star"]))


def test_translate_higher_order_context():
    out = translate_context(NAT, PARAMS, nat_ctx(("P", "El nat -> El o")))
    (ps, a), (pp, b) = out.entries
    assert convertible(INT, a, parse_term("(x : El int) -> Prf (geq_i x 0_i) -> El o"))
    oracle = parse_term(
        r"(x : El int) -> (h : Prf (geq_i x 0_i)) -> Prf (impd (P'star x h) (\ (z : Prf (P'star x h)). P'star x h))",
        ["P'star"],
    )
    assert convertible(INT, b, oracle)


def test_interpretation_obligations_pass():
    obs = check_interpretation(NAT, INT, PARAMS)
    assert len(obs) == 16
    assert all(o.passed for o in obs), [(o.subject, o.cause) for o in obs if not o.passed]


def test_missing_parameter():
    with pytest.raises(MissingParameter) as info:
        check_interpretation(NAT, INT, PARAMS.without("rec_n"))
    assert info.value.constant == "rec_n"


def test_wrong_parameter_fails_obligation():
    bad = PARAMS.merged({"0_n": Parameter(Const("0_i"), Const("0_i"))})
    failed = [(o.kind, o.subject) for o in check_interpretation(NAT, INT, bad) if not o.passed]
    assert ("PlusTyping", "0_n") in failed and ("StarTyping", "0_n") not in failed
    # rec_n mentions 0_n in its type, so it inherits the breakage
    assert {s for _, s in failed} == {"0_n", "rec_n"}


def test_transfer_axiom_instance():
    j = Judgment(EMPTY, Const("ax1_n"), NAT.lookup("ax1_n"))
    out = transfer_judgment(NAT, INT, PARAMS, j)
    assert out.subject == parse_term(r"\ (x : El int). \ (xp : Prf (geq_i x 0_i)). ax1_i x")
    transfer_plus_judgment(NAT, INT, PARAMS, j)


def test_transfer_variable():
    ctx = nat_ctx(("x", "El nat"))
    out = transfer_judgment(NAT, INT, PARAMS, Judgment(ctx, Var("x"), parse_term("El nat")))
    assert out.subject == Var("x'star")
    assert convertible(INT, out.type, parse_term("El int"))


def test_transfer_with_broken_map_reports_failure():
    bad = PARAMS.merged({"0_n": Parameter(Const("0_i"), Const("0_i"))})
    j = Judgment(EMPTY, Const("0_n"), NAT.lookup("0_n"))
    with pytest.raises(TransferFailure):
        transfer_plus_judgment(NAT, INT, bad, j)


def test_consistency_transform():
    el_o = App(Const("El"), Const("o"))
    prf = App(Const("Prf"), Var("P'star"))
    ctx = Context().extend("h", Pi("P'star", el_o, Pi("P'plus", arrow(prf, prf), prf)))
    t, j = consistency_transform(INT, "h", ctx)
    assert alpha_equal(t, parse_term(r"\ (P : El o). h P (\ (x : Prf P). x)", ["h"]))
    assert alpha_equal(j.type, parse_term("(P : El o) -> Prf P"))
    everything = parse_term(r"forall_ o (\ (x : El o). x)")
    assert convertible(INT, infer_type(INT, ctx, App(t, everything)), App(Const("Prf"), everything))


def test_consistency_transform_wrong_type():
    ctx = Context().extend("h", App(Const("El"), Const("o")))
    with pytest.raises(TypeMismatch):
        consistency_transform(INT, "h", ctx)


def test_prelude_self_translation_of_a_type():
    sig, pm = prelude_signature(), prelude_param_map()
    t = parse_term(r"Prf (forall_ o (\ (x : El o). x))")
    assert infer_type(sig, EMPTY, star(sig, pm, EMPTY, t)) == TYPE


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_hole_hygiene_and_name_injectivity(seed):
    gen = Generator(NAT, seed=seed)
    s = gen.try_sample()
    if s is None:
        return
    interp = Interpretation(NAT, full_param_map(NAT, PARAMS))
    tctx = interp.translate_context(s.context)
    assert len(set(tctx.names)) == 2 * len(s.context.entries)
    assert not contains_hole(interp.star(s.context, s.term))
    p = interp.plus(s.context, s.term)
    if isinstance(p, PlainTerm):
        assert not contains_hole(p.term)
    else:
        assert not contains_hole(p.fill(Var("x")))
    for _, a in tctx.entries:
        assert not contains_hole(a)
