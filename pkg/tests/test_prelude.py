import pytest

from pfk.errors import PreludeViolation
from pfk.interp import Parameter
from pfk.prelude import (
    PRELUDE_CONSTANTS,
    PRELUDE_PFK,
    prelude_param_map,
    prelude_signature,
    verify_prelude,
    write_reference_files,
)
from pfk.rewriting import ReductionBudget, convertible, whnf
from pfk.surface import parse_file, parse_param_map, parse_term
from pfk.terms import TYPE, Const, Pi
from pfk.typecheck import Context, RewriteRule, elaborate_theory, infer_type, sort_of


def test_signature_shape():
    sig = prelude_signature()
    assert tuple(sig.constants) == PRELUDE_CONSTANTS
    assert sum(isinstance(e, RewriteRule) for e in sig.entries) == 4
    assert len(sig.entries) == 12


def test_lookup_types():
    sig = prelude_signature()
    assert sig.lookup("El") == parse_term("Set -> TYPE")
    assert sig.lookup("impd") == parse_term("(x : El o) -> (Prf x -> El o) -> El o")


def test_user_constants_must_be_typed():
    with pytest.raises(PreludeViolation):
        elaborate_theory(parse_file("nat : TYPE.").items, prelude=True)
    th = elaborate_theory(parse_file("nat : Set.").items, prelude=True)
    assert "nat" in th.constants
    # without the prelude, kinds are allowed
    elaborate_theory(parse_file("nat : TYPE.").items)


def test_prelude_rules_unfold():
    sig = prelude_signature()
    t = parse_term(r"Prf (forall_ o (\ (x : El o). x))")
    w = whnf(sig, t)
    assert isinstance(w, Pi)
    assert convertible(sig, w, parse_term("(z : El o) -> Prf z"))
    assert sort_of(sig, Context(), t) == TYPE


def test_parameter_forms():
    pm = prelude_param_map()
    assert pm["Set"] == Parameter(Const("Set"), parse_term(r"\ (x : Set). El x -> El o"))
    assert pm["o"].plus == parse_term(r"\ (z : El o). impd z (\ (x : Prf z). z)")
    assert len(pm) == 8


def test_all_parameters_typecheck():
    sig = prelude_signature()
    for c, p in prelude_param_map().items():
        infer_type(sig, Context(), p.star)
        infer_type(sig, Context(), p.plus)


def test_self_interpretation_obligations():
    obs = verify_prelude()
    assert len(obs) == 24
    kinds = [o.kind for o in obs]
    assert kinds.count("StarTyping") == 8 and kinds.count("PlusTyping") == 8
    assert kinds.count("RuleStarConv") == 4 and kinds.count("RulePlusConv") == 4
    assert all(o.passed for o in obs), [(o.subject, o.cause) for o in obs if not o.passed]


def test_perturbed_parameters_fail():
    bad = prelude_param_map().merged({"o": Parameter(Const("o"), parse_term(r"\ (z : El o). z"))})
    obs = verify_prelude(params=bad)
    failed = {(o.kind, o.subject) for o in obs if not o.passed}
    # the identity is a well-typed o+ on its own but breaks everything built on it
    assert ("PlusTyping", "o") not in failed
    assert ("PlusTyping", "Prf") in failed
    assert len(obs) == 24


def test_tiny_budget_reports_exhaustion():
    obs = verify_prelude(budget=ReductionBudget(1))
    causes = [o.cause for o in obs if not o.passed]
    assert causes and any(c.startswith("BudgetExhausted") for c in causes)


def test_rule_sides_are_convertible_after_instantiation():
    sig = prelude_signature()
    lhs = parse_term(r"El (arrd o (\ (x : El o). o))")
    rhs = parse_term(r"(z : El o) -> El o")
    assert convertible(sig, lhs, rhs)
    assert not convertible(sig, lhs, parse_term("El o"))


def test_reference_files_round_trip(tmp_path):
    pfk, pfm = write_reference_files(tmp_path)
    assert parse_file(pfk.read_text()) == parse_file(PRELUDE_PFK)
    raw = parse_param_map(pfm.read_text())
    assert set(raw) == set(PRELUDE_CONSTANTS)
