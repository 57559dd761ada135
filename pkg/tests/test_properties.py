from pfk.corpus import nat_theory
from pfk.gen import Generator
from pfk.properties import (
    PropertyReport,
    consistency_witness,
    conversion_preserved,
    substitution_commutes,
    transfer_sound,
)
from pfk.typecheck import check_type


def test_report_line():
    assert PropertyReport("p", 3, [1]).line() == "FAIL p: 2/3"
    assert PropertyReport("p", 3).line() == "PASS p: 3/3"
    assert not PropertyReport("p").ok


def test_generator_samples_check():
    gen = Generator(nat_theory(), seed=7)
    for s in gen.samples(20):
        check_type(nat_theory(), s.context, s.term, s.type)


def test_generator_is_seeded():
    a = [s.term for s in Generator(nat_theory(), seed=3).samples(5)]
    b = [s.term for s in Generator(nat_theory(), seed=3).samples(5)]
    assert a == b


def test_substitution_instance_shape():
    ctx0, z, c, w, s = Generator(nat_theory(), seed=1).substitution_instance()
    assert z in s.term.fv
    assert s.context.entries[: len(ctx0.entries) + 1] == ctx0.extend(z, c).entries
    check_type(nat_theory(), ctx0, w, c)


def test_small_runs():
    for rep in (
        substitution_commutes(40, seed=5),
        conversion_preserved(30, seed=5),
        transfer_sound(10, seed=5),
        consistency_witness(),
    ):
        assert rep.ok, rep.failures[:3]
