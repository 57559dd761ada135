"""One test per acceptance criterion, each printing a single PASS/FAIL line."""

import json
import random
import re

import pytest

from pfk.cli import main
from pfk.corpus import INT, NAT, NAT_TO_INT, corpus_files, int_theory, nat_theorems, nat_theory, nat_to_int_params
from pfk.errors import BudgetExhausted, PreludeViolation
from pfk.gen import Generator
from pfk.interp import transfer_items
from pfk.prelude import verify_prelude
from pfk.properties import consistency_witness, conversion_preserved, substitution_commutes, transfer_sound
from pfk.rewriting import ReductionBudget, convertible, one_step_reducts, whnf
from pfk.surface import parse_file, parse_term, print_file, print_term
from pfk.terms import TYPE, App, Const, Lam, Pi, Var, alpha_equal, free_variables
from pfk.typecheck import Elaborator, elaborate_theory


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}{': ' + detail if detail else ''}")
        assert ok, detail

    return emit


def test_1_prelude_self_verification(report):
    obs = verify_prelude()
    kinds = [o.kind for o in obs]
    ok = (
        len(obs) == 24
        and kinds.count("StarTyping") == 8
        and kinds.count("PlusTyping") == 8
        and kinds.count("RuleStarConv") + kinds.count("RulePlusConv") == 8
        and all(o.passed for o in obs)
    )
    report("1 prelude self-verification", ok, f"{sum(o.passed for o in obs)}/{len(obs)} obligations")


def test_2_prelude_mode(report):
    try:
        elaborate_theory(parse_file("nat : TYPE.").items, prelude=True)
        rejected = False
    except PreludeViolation:
        rejected = True
    accepted = "nat" in elaborate_theory(parse_file("nat : Set.").items, prelude=True).constants
    report("2 user constants must be typed", rejected and accepted, f"TYPE rejected={rejected}, Set accepted={accepted}")


def test_3_interpretation(report, tmp_path, capsys):
    code = main(["interp", str(NAT), str(INT), str(NAT_TO_INT), "--format", "json"])
    doc = json.loads(capsys.readouterr().out)
    entries = re.findall(r"^[^\s(][^\n]*?\.(?:star|plus) :=.*?(?=^\S|\Z)", NAT_TO_INT.read_text(), re.M | re.S)
    flipped = 0
    for i in range(len(entries)):
        f = tmp_path / f"m{i}.pfm"
        f.write_text("".join(entries[:i] + entries[i + 1 :]))
        flipped += main(["interp", str(NAT), str(INT), str(f)]) != 0
    capsys.readouterr()
    ok = code == 0 and doc["summary"]["passed"] == doc["summary"]["total"] == 16 and flipped == len(entries) == 16
    report("3 nat to int interpretation", ok, f"exit {code}, {doc['summary']['passed']}/16, {flipped}/16 deletions flip")


def _transferred():
    records, tgt = transfer_items(nat_theory(), int_theory(), nat_to_int_params(), nat_theorems())
    return records, tgt


def test_4_proof_transfer(report):
    records, tgt = _transferred()
    expected = parse_term("(x : El int) -> Prf (geq_i x 0_i) -> Prf (geq_i (succ_i x) 0_i)")
    got = tgt.lookup("thm2'star")
    ok = [r.name for r in records] == ["thm1", "thm2"] and (alpha_equal(got, expected) or convertible(tgt, got, expected))
    report("4 proof transfer", ok, f"thm2* : {print_term(got)}")


def test_5_negative_control(report):
    _, tgt = _transferred()
    naive = parse_term("(x : El int) -> Prf (geq_i x 0_i)")
    got = tgt.lookup("thm1'star")
    with_hyp = parse_term("(x : El int) -> Prf (geq_i x 0_i) -> Prf (geq_i x 0_i)")
    ok = not convertible(tgt, got, naive) and convertible(tgt, got, with_hyp)
    report("5 transfer adds the non-negativity hypothesis", ok, f"thm1* : {print_term(got)}")


def test_6a_substitution(report):
    r = substitution_commutes(1000)
    report("6a " + r.name, r.ok and r.total == 1000, f"{r.total - len(r.failures)}/{r.total}")


def test_6b_conversion(report):
    r = conversion_preserved(500)
    report("6b " + r.name, r.ok and r.total == 500, f"{r.total - len(r.failures)}/{r.total}")


def test_6c_transfer(report):
    r = transfer_sound(100)
    report("6c " + r.name, r.ok and r.total == 100, f"{r.total - len(r.failures)}/{r.total}")


def test_6d_consistency(report):
    r = consistency_witness()
    report("6d " + r.name, r.ok, f"{r.total - len(r.failures)}/{r.total}")


VARS = ("x", "y", "z", "x'", "w")
CONSTS = ("A", "B", "f", "g", "a")


def _random_term(rng, scope, depth):
    r = rng.random()
    if depth <= 0 or r < 0.3:
        pool = list(scope) + list(CONSTS)
        return Var(v) if (v := rng.choice(pool)) in scope else Const(v)
    if r < 0.4:
        return TYPE
    if r < 0.7:
        return App(_random_term(rng, scope, depth - 1), _random_term(rng, scope, depth - 1))
    x = rng.choice(VARS)
    node = Lam if r < 0.85 else Pi
    return node(x, _random_term(rng, scope, depth - 1), _random_term(rng, scope | {x}, depth - 1))


def test_7_kernel_sanity(report):
    problems = []
    for f in corpus_files():
        if f.suffix == ".pfk":
            sf = parse_file(f.read_text(), str(f))
            if parse_file(print_file(sf)) != sf:
                problems.append(f"round-trip {f.name}")
    rng = random.Random(0)
    for _ in range(1000):
        t = _random_term(rng, frozenset(rng.sample(VARS, 2)), 5)
        if not alpha_equal(parse_term(print_term(t), sorted(free_variables(t))), t):
            problems.append(f"round-trip {print_term(t)}")
    th = nat_theory()
    gen = Generator(th, seed=0, redex_rate=0.4)
    samples = [gen.sample() for _ in range(200)]
    for s in samples:
        w = whnf(th, s.term)
        if whnf(th, w) != w:
            problems.append(f"whnf {print_term(s.term)}")
    for s, u in zip(samples, samples[1:]):
        pairs = [(s.term, u.term)] + [(s.term, b) for b in one_step_reducts(th, s.term)[:1]]
        for a, b in pairs:
            if not convertible(th, a, a) or convertible(th, a, b) != convertible(th, b, a):
                problems.append(f"conversion {print_term(a)} / {print_term(b)}")
    el = Elaborator()
    el.declare("A", TYPE)
    el.declare("c", Const("A"))
    el.add_rule((), Const("c"), Const("c"))
    try:
        whnf(el.theory, Const("c"), ReductionBudget(10_000))
        problems.append("looping rule did not exhaust the budget")
    except BudgetExhausted:
        pass
    report("7 kernel sanity", not problems, "; ".join(problems[:3]) or "round-trips, whnf, conversion, budget")
