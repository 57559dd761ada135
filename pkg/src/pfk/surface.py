"""Concrete syntax: ``.pfk`` theory files and ``.pfm`` parameter maps.

Grammar::

    item     ::= IDENT ":" term "."
               | "rule" "[" bindings "]" term "-->" term "."
               | "def" IDENT ":" term ":=" term "."
               | "assert" term "==" term "."
               | "assert" term ":" term "."
               | "require" IDENT "."
    term     ::= "\\" "(" IDENT ":" term ")" "." term
               | "(" IDENT ":" term ")" "->" term
               | app ["->" term]
    app      ::= atom+
    atom     ::= "TYPE" | IDENT | "(" term ")"
    bindings ::= IDENT ":" term ("," IDENT ":" term)*

    param    ::= IDENT "." ("star" | "plus") ":=" term "."

Comments are ``(; ... ;)`` and nest.  An identifier in term position is a
variable when a binder for it is in scope and a constant otherwise.
"""

from __future__ import annotations

import dataclasses
import os
from pathlib import Path
from typing import Sequence

from pfk.errors import DuplicateParameter, ParseError, RequireError
from pfk.terms import (
    MARKER,
    App,
    Const,
    Hole,
    Lam,
    Pi,
    Sort,
    Term,
    Var,
    arrow,
    constants,
    contains_hole,
    fresh_name,
    rename_bound,
)
from pfk.terms import TYPE as TYPE_TERM

KEYWORDS = {"TYPE", "rule", "def", "assert", "require"}
SYMBOLS = ("-->", "->", ":=", "==", ":", ".", ",", "[", "]", "(", ")", "\\")

PRELUDE_MODULE = "prelude"
THEORY_SUFFIX = ".pfk"
MAP_SUFFIX = ".pfm"


# -- items ------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Decl:
    name: str
    type: Term
    pos: tuple[int, int] | None = dataclasses.field(default=None, compare=False)


@dataclasses.dataclass(frozen=True)
class RuleItem:
    context: tuple[tuple[str, Term], ...]
    lhs: Term
    rhs: Term
    pos: tuple[int, int] | None = dataclasses.field(default=None, compare=False)


@dataclasses.dataclass(frozen=True)
class Def:
    name: str
    type: Term
    body: Term
    pos: tuple[int, int] | None = dataclasses.field(default=None, compare=False)


@dataclasses.dataclass(frozen=True)
class AssertConv:
    lhs: Term
    rhs: Term
    pos: tuple[int, int] | None = dataclasses.field(default=None, compare=False)


@dataclasses.dataclass(frozen=True)
class AssertType:
    term: Term
    type: Term
    pos: tuple[int, int] | None = dataclasses.field(default=None, compare=False)


@dataclasses.dataclass(frozen=True)
class Require:
    module: str
    pos: tuple[int, int] | None = dataclasses.field(default=None, compare=False)


Item = Decl | RuleItem | Def | AssertConv | AssertType | Require


def item_name(item) -> str:
    match item:
        case Decl(name, _, _) | Def(name, _, _, _):
            return name
        case RuleItem(_, lhs, rhs, _):
            return f"{print_term(lhs)} --> {print_term(rhs)}"
        case AssertConv(t, u, _):
            return f"{print_term(t)} == {print_term(u)}"
        case AssertType(t, a, _):
            return f"{print_term(t)} : {print_term(a)}"
        case Require(m, _):
            return m
    raise TypeError(item)


@dataclasses.dataclass
class SourceFile:
    path: str | None
    items: list

    def __eq__(self, other):
        if not isinstance(other, SourceFile) or len(self.items) != len(other.items):
            return False
        return all(_items_equal(a, b) for a, b in zip(self.items, other.items))


def _items_equal(a, b) -> bool:
    # dataclass equality already compares terms up to alpha; rule contexts
    # additionally rename the rule variables consistently
    if isinstance(a, RuleItem) and isinstance(b, RuleItem):
        if len(a.context) != len(b.context):
            return False
        ren = {}
        for (x, ta), (y, tb) in zip(a.context, b.context):
            if _rename(tb, ren) != ta:
                return False
            ren[y] = Var(x)
        return _rename(b.lhs, ren) == a.lhs and _rename(b.rhs, ren) == a.rhs
    return a == b


def _rename(t, ren):
    from pfk.terms import substitute

    return substitute(t, ren)


# -- lexer ----------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Token:
    kind: str  # IDENT, KW, SYM, EOF
    text: str
    pos: tuple[int, int]


def _is_ident_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_" or ch == MARKER)


def tokenize(text: str) -> list[Token]:
    text = text.replace("\r\n", "\n")
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line, col = line + 1, 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if text.startswith("(;", i):
            start = (line, col)
            depth = 0
            while True:
                if i >= n:
                    raise ParseError("unterminated comment", start, expected=[";)"])
                if text.startswith("(;", i):
                    depth += 1
                    advance(2)
                elif text.startswith(";)", i):
                    depth -= 1
                    advance(2)
                    if depth == 0:
                        break
                else:
                    advance(1)
            continue
        pos = (line, col)
        if _is_ident_char(ch) and ch != MARKER:
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            toks.append(Token("KW" if word in KEYWORDS else "IDENT", word, pos))
            advance(j - i)
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("SYM", sym, pos))
                advance(len(sym))
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", pos)
    toks.append(Token("EOF", "", (line, col)))
    return toks


# -- parser ------------------------------------------------------------------------------


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("SYM", "KW") and self.tok.text == text

    def fail(self, *expected):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        raise ParseError(f"unexpected {found}", t.pos, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "IDENT":
            self.fail("identifier")
        t = self.tok
        self.i += 1
        return t.text

    # terms

    def term(self, scope: frozenset) -> Term:
        if self.at("\\"):
            self.i += 1
            self.expect("(")
            x = self.ident()
            self.expect(":")
            a = self.term(scope)
            self.expect(")")
            self.expect(".")
            return Lam(x, a, self.term(scope | {x}))
        if self.at("(") and self.peek().kind == "IDENT" and self.peek(2).text == ":" and self.peek(2).kind == "SYM":
            self.i += 1
            x = self.ident()
            self.expect(":")
            a = self.term(scope)
            self.expect(")")
            self.expect("->")
            return Pi(x, a, self.term(scope | {x}))
        left = self.app(scope)
        if self.at("->"):
            self.i += 1
            return arrow(left, self.term(scope))
        return left

    def starts_atom(self) -> bool:
        return self.tok.kind == "IDENT" or self.at("TYPE") or self.at("(")

    def app(self, scope) -> Term:
        if not self.starts_atom() and not self.at("\\"):
            self.fail("term")
        t = self.atom(scope)
        while self.starts_atom():
            t = App(t, self.atom(scope))
        return t

    def atom(self, scope) -> Term:
        if self.at("TYPE"):
            self.i += 1
            return TYPE_TERM
        if self.tok.kind == "IDENT":
            name = self.ident()
            return Var(name) if name in scope else Const(name)
        if self.at("("):
            self.i += 1
            t = self.term(scope)
            self.expect(")")
            return t
        self.fail("term")

    # items

    def item(self) -> Item:
        pos = self.tok.pos
        if self.at("rule"):
            self.i += 1
            self.expect("[")
            ctx, scope = [], frozenset()
            while True:
                x = self.ident()
                self.expect(":")
                ctx.append((x, self.term(scope)))
                scope |= {x}
                if not self.at(","):
                    break
                self.i += 1
            self.expect("]")
            lhs = self.term(scope)
            self.expect("-->")
            rhs = self.term(scope)
            self.expect(".")
            return RuleItem(tuple(ctx), lhs, rhs, pos)
        if self.at("def"):
            self.i += 1
            name = self.ident()
            self.expect(":")
            ty = self.term(frozenset())
            self.expect(":=")
            body = self.term(frozenset())
            self.expect(".")
            return Def(name, ty, body, pos)
        if self.at("assert"):
            self.i += 1
            t = self.term(frozenset())
            if self.at("=="):
                self.i += 1
                u = self.term(frozenset())
                self.expect(".")
                return AssertConv(t, u, pos)
            if self.at(":"):
                self.i += 1
                a = self.term(frozenset())
                self.expect(".")
                return AssertType(t, a, pos)
            self.fail("'=='", "':'")
        if self.at("require"):
            self.i += 1
            name = self.ident()
            self.expect(".")
            return Require(name, pos)
        if self.tok.kind == "IDENT":
            name = self.ident()
            self.expect(":")
            ty = self.term(frozenset())
            self.expect(".")
            return Decl(name, ty, pos)
        self.fail("identifier", "'rule'", "'def'", "'assert'", "'require'")

    def items(self) -> list:
        out = []
        while self.tok.kind != "EOF":
            out.append(self.item())
        return out


def parse_file(text: str, path: str | None = None) -> SourceFile:
    try:
        return SourceFile(path, Parser(text).items())
    except ParseError as e:
        if path is not None:
            e.in_file(path)
        raise


def parse_term(text: str, scope: Sequence[str] = ()) -> Term:
    p = Parser(text)
    t = p.term(frozenset(scope))
    if p.tok.kind != "EOF":
        p.fail("end of input")
    return t


# -- printer -----------------------------------------------------------------------------


def print_term(t: Term) -> str:
    """Render ``t`` with minimal parentheses; re-parsing gives back ``t`` up to alpha."""
    if contains_hole(t):
        raise ValueError("cannot print a term containing a hole")
    return _pr(t, 0, frozenset(constants(t)))


def _binder(x: str, body: Term, avoid: frozenset) -> tuple[str, Term]:
    # a binder named like a constant it encloses would capture it on re-parse
    if x in avoid or x in KEYWORDS:
        x2 = fresh_name(x, avoid | body.fv)
        return x2, rename_bound(x, body, x2)
    return x, body


def _pr(t: Term, prec: int, consts: frozenset) -> str:
    match t:
        case Sort(tag):
            return tag
        case Var(x) | Const(x):
            return x
        case App(f, a):
            s = f"{_pr(f, 1, consts)} {_pr(a, 2, consts)}"
            return f"({s})" if prec > 1 else s
        case Lam(x, a, b):
            x, b = _binder(x, b, consts)
            s = f"\\ ({x} : {_pr(a, 0, consts)}). {_pr(b, 0, consts)}"
            return f"({s})" if prec > 0 else s
        case Pi(x, a, b):
            if x not in b.fv:
                s = f"{_pr(a, 1, consts)} -> {_pr(b, 0, consts)}"
            else:
                x, b = _binder(x, b, consts)
                s = f"({x} : {_pr(a, 0, consts)}) -> {_pr(b, 0, consts)}"
            return f"({s})" if prec > 0 else s
        case Hole():
            raise ValueError("hole")
    raise TypeError(t)


def print_item(item) -> str:
    match item:
        case Decl(name, ty, _):
            return f"{name} : {print_term(ty)}."
        case RuleItem(ctx, lhs, rhs, _):
            binds = ", ".join(f"{x} : {print_term(a)}" for x, a in ctx)
            return f"rule [{binds}] {print_term(lhs)} --> {print_term(rhs)}."
        case Def(name, ty, body, _):
            return f"def {name} : {print_term(ty)} := {print_term(body)}."
        case AssertConv(t, u, _):
            return f"assert {print_term(t)} == {print_term(u)}."
        case AssertType(t, a, _):
            return f"assert {print_term(t)} : {print_term(a)}."
        case Require(m, _):
            return f"require {m}."
    raise TypeError(item)


def print_file(sf: SourceFile | Sequence) -> str:
    items = sf.items if isinstance(sf, SourceFile) else sf
    return "".join(print_item(it) + "\n" for it in items)


# -- parameter maps ---------------------------------------------------------------------------


@dataclasses.dataclass
class RawParam:
    star: Term | None = None
    plus: Term | None = None
    pos: tuple[int, int] | None = None


def parse_param_map(text: str, path: str | None = None) -> dict[str, RawParam]:
    """Parse ``c.star := t.`` / ``c.plus := t.`` lines into a raw map."""
    p = Parser(text)
    out: dict[str, RawParam] = {}
    try:
        while p.tok.kind != "EOF":
            pos = p.tok.pos
            name = p.ident()
            p.expect(".")
            which_tok = p.tok
            which = p.ident()
            if which not in ("star", "plus"):
                raise ParseError(f"unexpected {which!r}", which_tok.pos, ["'star'", "'plus'"])
            p.expect(":=")
            t = p.term(frozenset())
            p.expect(".")
            entry = out.setdefault(name, RawParam(pos=pos))
            if getattr(entry, which) is not None:
                raise DuplicateParameter(f"duplicate parameter {name}.{which}", pos)
            setattr(entry, which, t)
    except (ParseError, DuplicateParameter) as e:
        if path is not None:
            e.in_file(path)
        raise
    return out


def print_param_map(params) -> str:
    lines = []
    for name, entry in params.items():
        star, plus = (entry.star, entry.plus) if hasattr(entry, "star") else entry
        lines.append(f"{name}.star := {print_term(star)}.")
        lines.append(f"{name}.plus := {print_term(plus)}.")
    return "\n".join(lines) + "\n"


# -- file inclusion -----------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Located:
    path: str
    item: object

    @property
    def pos(self):
        return self.item.pos

    def where(self) -> str:
        if self.item.pos is None:
            return self.path
        return f"{self.path}:{self.item.pos[0]}:{self.item.pos[1]}"


@dataclasses.dataclass
class LoadResult:
    items: list[Located]
    files: list[str]
    prelude: bool


def default_search_path() -> list[str]:
    env = os.environ.get("PFK_PATH", "")
    return [p for p in env.split(os.pathsep) if p]


def resolve_module(name: str, from_dir: Path, search_path: Sequence) -> Path:
    for d in [from_dir, *map(Path, search_path)]:
        cand = Path(d) / (name + THEORY_SUFFIX)
        if cand.is_file():
            return cand.resolve()
    raise RequireError(f"cannot find module {name} (looked in {from_dir} and {list(map(str, search_path))})")


def load_items(paths: Sequence, search_path: Sequence | None = None) -> LoadResult:
    """Read root files and everything they require, in dependency order.

    Each file is included once; cyclic requires are an error.  Requiring
    ``prelude`` selects the built-in prelude rather than a file.
    """
    if search_path is None:
        search_path = default_search_path()
    roots = [Path(p) for p in paths]
    search = [*{str(r.resolve().parent): None for r in roots}, *search_path]
    result = LoadResult([], [], False)
    done: set[Path] = set()
    active: list[Path] = []

    def visit(path: Path):
        path = path.resolve()
        if path in done:
            return
        if path in active:
            cycle = " -> ".join(p.name for p in active[active.index(path) :] + [path])
            raise RequireError(f"cyclic require: {cycle}")
        active.append(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise RequireError(f"cannot read {path}: {e.strerror or e}") from e
        sf = parse_file(text, str(path))
        for item in sf.items:
            if isinstance(item, Require):
                if item.module == PRELUDE_MODULE:
                    result.prelude = True
                    continue
                try:
                    dep = resolve_module(item.module, path.parent, search)
                except RequireError as e:
                    raise e.at(item.pos).in_file(path)
                visit(dep)
            else:
                result.items.append(Located(str(path), item))
        active.pop()
        done.add(path)
        result.files.append(str(path))

    for r in roots:
        visit(r)
    return result


def load_theory(paths, search_path=None, budget=None):
    """Load and elaborate files into a theory; raises on the first error."""
    from pfk.typecheck import elaborate_theory

    if isinstance(paths, (str, Path)):
        paths = [paths]
    res = load_items(paths, search_path)
    return elaborate_theory([loc.item for loc in res.items], prelude=res.prelude, budget=budget)
