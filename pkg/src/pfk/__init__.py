"""Kernel, translator and tooling for theory interpretations in the
λΠ-calculus modulo rewriting."""

import sys

__version__ = "0.1.0"

# terms are nested dataclasses; deep spines need headroom
if sys.getrecursionlimit() < 10_000:
    sys.setrecursionlimit(10_000)
