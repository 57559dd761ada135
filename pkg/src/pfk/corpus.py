"""Bundled example theories: natural numbers, integers, the parameter map
interpreting the former in the latter, and two theorems to transfer."""

from __future__ import annotations

import functools
from pathlib import Path

from pfk.surface import load_items, load_theory, parse_param_map

CORPUS_DIR = Path(__file__).parent / "corpus"

NAT = CORPUS_DIR / "nat.pfk"
INT = CORPUS_DIR / "int.pfk"
NAT_TO_INT = CORPUS_DIR / "nat_to_int.pfm"
THM_NAT = CORPUS_DIR / "thm_nat.pfk"

NAT_CONSTANTS = ("nat", "0_n", "succ_n", "geq_n", "ax1_n", "ax2_n", "ax3_n", "rec_n")
INT_CONSTANTS = (
    "int", "0_i", "succ_i", "pred_i", "geq_i",
    "ax1_i", "ax2_i", "ax3_i", "ax4_i", "ax5_i", "rec_i", "proof_irr",
)  # fmt: skip


def corpus_files() -> list[Path]:
    return sorted(CORPUS_DIR.glob("*.pf[km]"))


@functools.lru_cache(maxsize=None)
def nat_theory():
    return load_theory([NAT], search_path=[])


@functools.lru_cache(maxsize=None)
def int_theory():
    return load_theory([INT], search_path=[])


@functools.lru_cache(maxsize=None)
def nat_to_int_params():
    from pfk.interp import ParamMap

    raw = parse_param_map(NAT_TO_INT.read_text(encoding="utf-8"), str(NAT_TO_INT))
    return ParamMap.from_raw(raw, nat_theory())


def nat_theorems() -> list:
    """The items of the theorem file, without those of the theories it requires."""
    base = set(load_items([NAT], search_path=[]).files)
    return [loc.item for loc in load_items([THM_NAT], search_path=[]).items if loc.path not in base]


def nat_with_theorems():
    return load_theory([THM_NAT], search_path=[])
