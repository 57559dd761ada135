import pytest

from pfk.corpus import nat_theory
from pfk.errors import (
    AssertionFailure,
    DuplicateConstant,
    HeadNotConstant,
    IllFormedContext,
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
from pfk.gen import Generator
from pfk.prelude import prelude_signature
from pfk.rewriting import convertible, one_step_reducts, whnf
from pfk.surface import parse_file, parse_term
from pfk.terms import KIND, TYPE, Const, Sort, Var
from pfk.typecheck import (
    Context,
    Elaborator,
    check_context,
    check_type,
    elaborate_theory,
    infer_type,
    sort_of,
)

SIG = prelude_signature()


def t(text, scope=()):
    return parse_term(text, scope)


def elab(text, prelude=True):
    return elaborate_theory(parse_file(text).items, prelude=prelude)


# -- contexts -----------------------------------------------------------------------


def test_empty_context():
    check_context(SIG, Context())


def test_context_with_proposition_type():
    check_context(SIG, [("x", t("El o"))])


def test_context_entry_must_be_a_type():
    with pytest.raises(IllFormedContext) as info:
        check_context(SIG, [("x", Const("o"))])
    assert info.value.entry == "x"
    assert isinstance(info.value.cause, SortError)


def test_context_names_distinct():
    with pytest.raises(IllFormedContext):
        check_context(SIG, [("x", t("El o")), ("x", t("El o"))])


# -- inference ----------------------------------------------------------------------


def test_type_has_type_kind():
    assert infer_type(SIG, (), TYPE) == KIND


def test_infer_constants():
    assert infer_type(SIG, (), Const("o")) == Const("Set")
    assert infer_type(SIG, (), Const("Prf")) == t("El o -> TYPE")


def test_infer_dependent_application():
    assert infer_type(SIG, (), t("arrd o")) == t("(El o -> Set) -> Set")


def test_infer_errors():
    with pytest.raises(UnboundVariable):
        infer_type(SIG, (), Var("x"))
    with pytest.raises(UnknownConstant):
        infer_type(SIG, (), Const("nope"))
    with pytest.raises(NotAFunction):
        infer_type(SIG, (), t("o o"))
    with pytest.raises(SortError):
        infer_type(SIG, (), t("(x : o) -> Set"))
    with pytest.raises(TypeMismatch):
        infer_type(SIG, (), t("El (El o)"))


def test_kind_has_no_type():
    with pytest.raises(SortError):
        infer_type(SIG, (), KIND)


def test_sort_of():
    assert sort_of(SIG, (), t("El o")) == TYPE
    assert sort_of(SIG, (), t("Set -> TYPE")) == KIND
    with pytest.raises(SortError):
        sort_of(SIG, (), Const("o"))


# -- checking -----------------------------------------------------------------------


def test_check_constant_of_example_theory():
    check_type(nat_theory(), (), Const("0_n"), t("El nat"))


def test_check_rigid_mismatch():
    with pytest.raises(TypeMismatch):
        check_type(SIG, (), Const("o"), t("El o"))


def test_check_lambda_against_rewritten_product():
    # Prf (impd o' f) unfolds to a product by the impd rule
    ctx = Context([("p", t("El o"))])
    check_type(SIG, ctx, t(r"\ (x : Prf p). x", ["p"]), t(r"Prf (impd p (\ (z : Prf p). p))", ["p"]))


def test_check_lambda_annotation_must_agree():
    with pytest.raises(TypeMismatch):
        check_type(SIG, [("p", t("El o"))], t(r"\ (x : El o). x"), t(r"Prf (impd p (\ (z : Prf p). p))", ["p"]))


def test_check_expected_must_be_well_sorted():
    with pytest.raises(SortError):
        check_type(SIG, (), Const("o"), Const("o"))


def test_binder_shadowing_context_is_handled():
    ctx = Context([("x", t("El o"))])
    ty = t("(x : El o) -> El o")
    check_type(SIG, ctx, t(r"\ (x : El o). x"), ty)
    assert convertible(SIG, infer_type(SIG, ctx, t(r"\ (y : El o). x", ["x"])), ty)


# -- elaboration -----------------------------------------------------------------------


def test_prelude_elaborates_to_twelve_entries():
    assert len(SIG.entries) == 12
    assert len(SIG.rules) == 4


def test_example_theory_elaborates():
    th = nat_theory()
    assert len(th.user_entries) == 8
    assert th.prelude_included


def test_prelude_violation():
    with pytest.raises(PreludeViolation):
        elab("nat : TYPE.")
    elab("nat : Set.")


def test_kinds_allowed_without_prelude():
    elab("nat : TYPE. P : nat -> TYPE.", prelude=False)


def test_duplicate_constant():
    with pytest.raises(DuplicateConstant):
        elab("a : Set. a : Set.")


def test_rule_checks():
    base = "a : Set. f : El a -> El a. g : El a -> El a -> El a. "
    elab(base + "rule [x : El a] f (f x) --> x.")
    with pytest.raises(NonLinearPattern):
        elab(base + "rule [x : El a] g x x --> x.")
    with pytest.raises(HeadNotConstant):
        elab(base + "rule [x : El a -> El a, y : El a] x y --> y.")
    with pytest.raises(MalformedRule):
        elab(base + "rule [x : El a, y : El a] f x --> x.")
    with pytest.raises(TypePreservationFailure):
        elab(base + "b : Set. c : El b. rule [x : El a] f x --> c.")


def test_sorts_forbidden_in_rules():
    with pytest.raises(MalformedRule):
        elab(r"A : TYPE. F : A -> A. rule [x : A] F x --> (\ (y : TYPE). x) A.", prelude=False)


def test_definition_becomes_rule():
    th = elab(r"a : Set. def id : El a -> El a := \ (x : El a). x.")
    assert th.is_defined("id")
    assert th.rules_for("id")[0].lhs == Const("id")
    assert whnf(th, t("id c")) == Const("c")


def test_definition_body_is_checked():
    with pytest.raises(TypeMismatch):
        elab(r"a : Set. def bad : El a := o.")


def test_assertions():
    elab("a : Set. assert El (arrd a (\\ (x : El a). a)) == (z : El a) -> El a. assert o : Set.")
    with pytest.raises(AssertionFailure):
        elab("assert El o == Set.")
    with pytest.raises(TypeMismatch):
        elab("assert o : El o.")


def test_elaborator_stops_at_error_position():
    with pytest.raises(TypeMismatch) as info:
        elab("a : Set.\nassert o : El o.")
    assert info.value.pos == (2, 1)


# -- properties over generated terms ---------------------------------------------------


@pytest.fixture(scope="module")
def samples():
    gen = Generator(nat_theory(), seed=11)
    return [gen.sample() for _ in range(80)]


def test_agreement_and_sort_dichotomy(samples):
    th = nat_theory()
    for s in samples:
        a = infer_type(th, s.context, s.term)
        check_type(th, s.context, s.term, a)
        if a != KIND:
            assert isinstance(whnf(th, infer_type(th, s.context, a)), Sort)


def test_subject_reduction(samples):
    th = nat_theory()
    for s in samples:
        w = whnf(th, s.term)
        check_type(th, s.context, w, s.type)
        for r in one_step_reducts(th, s.term)[:3]:
            check_type(th, s.context, r, s.type)


def test_weakening(samples):
    th = nat_theory()
    for s in samples:
        x = "fresh_w"
        check_type(th, s.context.extend(x, t("El nat")), s.term, s.type)
