"""The built-in prelude signature, its sixteen parameter terms, and the
self-check that the parameters interpret the prelude in itself.

Surface names: ``arrd`` is the dependent arrow on ``Set``, ``impd`` the
dependent implication on ``El o``, ``pi_`` and ``forall_`` the two mixed
quantifiers.  In the parameter terms a binder ``as``/``ap`` stands for the
star/plus pair of an argument ``a``.
"""

from __future__ import annotations

import functools
from pathlib import Path

from pfk.surface import parse_file, parse_param_map

PRELUDE_PFK = """\
(; Built-in prelude: universes of sorts and propositions. ;)
Set : TYPE.
o : Set.
El : Set -> TYPE.
Prf : El o -> TYPE.
arrd : (x : Set) -> (El x -> Set) -> Set.
impd : (x : El o) -> (Prf x -> El o) -> El o.
rule [x : Set, y : El x -> Set] El (arrd x y) --> (z : El x) -> El (y z).
rule [x : El o, y : Prf x -> El o] Prf (impd x y) --> (z : Prf x) -> Prf (y z).
pi_ : (x : El o) -> (Prf x -> Set) -> Set.
forall_ : (x : Set) -> (El x -> El o) -> El o.
rule [x : El o, y : Prf x -> Set] El (pi_ x y) --> (z : Prf x) -> El (y z).
rule [x : Set, y : El x -> El o] Prf (forall_ x y) --> (z : El x) -> Prf (y z).
"""

_O_PLUS = r"\ (z : El o). impd z (\ (x : Prf z). z)"

_SET_HEAD = (
    r"\ (as : Set). \ (ap : El as -> El o). "
    r"\ (bs : (xs : El as) -> Prf (ap xs) -> {cod}). "
    r"\ (bp : (xs : El as) -> (xp : Prf (ap xs)) -> {pred})."
)
_PROP_HEAD = (
    r"\ (as : El o). \ (ap : Prf (({oplus}) as)). "
    r"\ (bs : (xs : Prf as) -> Prf as -> {cod}). "
    r"\ (bp : (xs : Prf as) -> (xp : Prf as) -> {pred})."
)

_ARRD_HEAD = _SET_HEAD.format(cod="Set", pred="El (bs xs xp) -> El o")
_IMPD_HEAD = _PROP_HEAD.format(oplus=_O_PLUS, cod="El o", pred=f"Prf (({_O_PLUS}) (bs xs xp))")
_PI_HEAD = _PROP_HEAD.format(oplus=_O_PLUS, cod="Set", pred="El (bs xs xp) -> El o")
_FORALL_HEAD = _SET_HEAD.format(cod="El o", pred=f"Prf (({_O_PLUS}) (bs xs xp))")

_ARRD_STAR = rf"{_ARRD_HEAD} arrd as (\ (xs : El as). pi_ (ap xs) (bs xs))"
_IMPD_STAR = rf"{_IMPD_HEAD} impd as (\ (xs : Prf as). impd as (bs xs))"
_PI_STAR = rf"{_PI_HEAD} pi_ as (\ (xs : Prf as). pi_ as (bs xs))"
_FORALL_STAR = rf"{_FORALL_HEAD} forall_ as (\ (xs : El as). impd (ap xs) (bs xs))"

PRELUDE_PFM = f"""\
(; Parameters interpreting the prelude in itself. ;)
Set.star := Set.
Set.plus := \\ (x : Set). El x -> El o.
o.star := o.
o.plus := {_O_PLUS}.
El.star := \\ (xs : Set). \\ (xp : El xs -> El o). El xs.
El.plus := \\ (us : Set). \\ (up : El us -> El o). \\ (x : El us). Prf (up x).
Prf.star := \\ (xs : El o). \\ (xp : Prf (({_O_PLUS}) xs)). Prf xs.
Prf.plus := \\ (us : El o). \\ (up : Prf (({_O_PLUS}) us)). \\ (x : Prf us). Prf us.
arrd.star := {_ARRD_STAR}.
arrd.plus := {_ARRD_HEAD} \\ (f : El (({_ARRD_STAR}) as ap bs bp)).
  forall_ as (\\ (xs : El as). impd (ap xs) (\\ (xp : Prf (ap xs)). bp xs xp (f xs xp))).
impd.star := {_IMPD_STAR}.
impd.plus := {_IMPD_HEAD} \\ (p : Prf (({_IMPD_STAR}) as ap bs bp)). p.
pi_.star := {_PI_STAR}.
pi_.plus := {_PI_HEAD} \\ (f : El (({_PI_STAR}) as ap bs bp)).
  impd as (\\ (xs : Prf as). impd as (\\ (xp : Prf as). bp xs xp (f xs xp))).
forall_.star := {_FORALL_STAR}.
forall_.plus := {_FORALL_HEAD} \\ (p : Prf (({_FORALL_STAR}) as ap bs bp)). p.
"""

PRELUDE_CONSTANTS = ("Set", "o", "El", "Prf", "arrd", "impd", "pi_", "forall_")


@functools.lru_cache(maxsize=None)
def prelude_signature():
    """The twelve-entry prelude theory (8 constants, 4 rules)."""
    from pfk.typecheck import elaborate_theory

    return elaborate_theory(parse_file(PRELUDE_PFK, "<prelude>").items)


@functools.lru_cache(maxsize=None)
def prelude_param_map():
    from pfk.interp import ParamMap, Parameter

    raw = parse_param_map(PRELUDE_PFM, "<prelude.pfm>")
    return ParamMap({c: Parameter(raw[c].star, raw[c].plus) for c in PRELUDE_CONSTANTS})


def verify_prelude(budget=None, params=None):
    """Check that the parameters interpret the prelude in itself.

    Returns the 24 obligations: 8 star typings, 8 plus typings and the
    star/plus conversions of the 4 rules.  Failures are recorded, not raised.
    """
    from pfk.interp import check_interpretation

    sig = prelude_signature()
    return check_interpretation(
        sig, sig, params if params is not None else prelude_param_map(), budget, include_prelude=True
    )


def write_reference_files(directory) -> list[Path]:
    """Write ``prelude.pfk`` and ``prelude.pfm`` into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = []
    for name, text in (("prelude.pfk", PRELUDE_PFK), ("prelude.pfm", PRELUDE_PFM)):
        p = d / name
        p.write_text(text, encoding="utf-8")
        out.append(p)
    return out
