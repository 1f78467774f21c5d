"""Terms and formulas of first-order arithmetic over 0, S, +, * and =.

Also covers 0-ary propositional atoms, which the toy semantics uses.

Concrete grammar::

    term    := "0" | "c" DIGITS | "S(" term ")" | term "+" term | term "*" term
             | "(" term ")" | VAR
    formula := "bot" | term "=" term | "~" formula | formula "->" formula
             | "forall" VAR "." formula | "(" formula ")" | VAR

A bare ``VAR`` in formula position is a 0-ary atom.  ``*`` binds tighter than
``+``, both associate to the left; ``->`` is right-associative; ``forall``
extends as far right as possible.  ``~P`` is read as ``P -> bot``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union

__all__ = [
    "Signature", "BASE_SIGNATURE",
    "Zero", "Const", "Succ", "Add", "Mul", "Var", "Term",
    "Atom", "Prop", "Impl", "Forall", "Bot", "BOT", "Formula",
    "ParseError", "UnknownConstantError",
    "numeral", "numeral_value", "is_closed", "free_vars", "term_vars",
    "substitute", "substitute_term", "render", "parse_term", "parse_formula",
    "parse_atom", "neg", "closed_terms_upto", "terms_of_size", "term_size",
    "formula_atoms", "constants_in",
]


@dataclass(frozen=True)
class Signature:
    """The arithmetic signature, optionally extended with constants c1..ck."""

    n_constants: int = 0

    def __post_init__(self):
        if self.n_constants < 0:
            raise ValueError("number of extra constants must be non-negative")

    @property
    def constants(self) -> tuple[str, ...]:
        return ("0",) + tuple(f"c{i}" for i in range(1, self.n_constants + 1))

    def has_constant(self, index: int) -> bool:
        return 1 <= index <= self.n_constants


BASE_SIGNATURE = Signature()


# -- terms -----------------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Const:
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("constant index must be positive")

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Succ:
    arg: "Term"

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Add:
    left: "Term"
    right: "Term"

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Mul:
    left: "Term"
    right: "Term"

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


Term = Union[Zero, Const, Succ, Add, Mul, Var]

ZERO = Zero()


# -- formulas --------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    """An equation ``lhs = rhs``."""

    lhs: Term
    rhs: Term

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Prop:
    """A 0-ary atom, used by toy universes."""

    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Impl:
    ante: "Formula"
    cons: "Formula"

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Bot:
    def __str__(self):
        return "bot"


BOT = Bot()

Formula = Union[Atom, Prop, Impl, Forall, Bot]


def neg(f: Formula) -> Formula:
    return Impl(f, BOT)


# -- numerals --------------------------------------------------------------

def numeral(n: int) -> Term:
    if n < 0:
        raise ValueError("numerals denote natural numbers")
    t: Term = ZERO
    for _ in range(n):
        t = Succ(t)
    return t


def numeral_value(t: Term) -> int | None:
    """Return n if t is literally S^n(0), else None."""
    n = 0
    while isinstance(t, Succ):
        t = t.arg
        n += 1
    return n if isinstance(t, Zero) else None


# -- traversal -------------------------------------------------------------

def term_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Succ):
        return term_vars(t.arg)
    if isinstance(t, (Add, Mul)):
        return term_vars(t.left) | term_vars(t.right)
    return frozenset()


def constants_in(t: Term) -> frozenset[int]:
    if isinstance(t, Const):
        return frozenset([t.index])
    if isinstance(t, Succ):
        return constants_in(t.arg)
    if isinstance(t, (Add, Mul)):
        return constants_in(t.left) | constants_in(t.right)
    return frozenset()


def term_size(t: Term) -> int:
    if isinstance(t, Succ):
        return 1 + term_size(t.arg)
    if isinstance(t, (Add, Mul)):
        return 1 + term_size(t.left) + term_size(t.right)
    return 1


def free_vars(f: Formula | Term) -> frozenset[str]:
    if isinstance(f, Atom):
        return term_vars(f.lhs) | term_vars(f.rhs)
    if isinstance(f, Impl):
        return free_vars(f.ante) | free_vars(f.cons)
    if isinstance(f, Forall):
        return free_vars(f.body) - {f.var}
    if isinstance(f, (Prop, Bot)):
        return frozenset()
    return term_vars(f)


def is_closed(x: Formula | Term) -> bool:
    return not free_vars(x)


def formula_atoms(f: Formula) -> frozenset[str]:
    """Names of the 0-ary atoms occurring in f."""
    if isinstance(f, Prop):
        return frozenset([f.name])
    if isinstance(f, Impl):
        return formula_atoms(f.ante) | formula_atoms(f.cons)
    if isinstance(f, Forall):
        return formula_atoms(f.body)
    return frozenset()


def substitute_term(t: Term, var: str, s: Term) -> Term:
    if isinstance(t, Var):
        return s if t.name == var else t
    if isinstance(t, Succ):
        return Succ(substitute_term(t.arg, var, s))
    if isinstance(t, Add):
        return Add(substitute_term(t.left, var, s), substitute_term(t.right, var, s))
    if isinstance(t, Mul):
        return Mul(substitute_term(t.left, var, s), substitute_term(t.right, var, s))
    return t


def substitute(f: Formula, var: str, t: Term) -> Formula:
    """Replace the free occurrences of ``var`` in f by the closed term t."""
    if isinstance(f, Atom):
        return Atom(substitute_term(f.lhs, var, t), substitute_term(f.rhs, var, t))
    if isinstance(f, Impl):
        return Impl(substitute(f.ante, var, t), substitute(f.cons, var, t))
    if isinstance(f, Forall):
        if f.var == var:
            return f
        if var in free_vars(f.body) and f.var in term_vars(t):
            raise ValueError(f"substituting {render(t)} for {var} would capture {f.var}")
        return Forall(f.var, substitute(f.body, var, t))
    return f


# -- printing --------------------------------------------------------------

def _render_term(t: Term, prec: int) -> str:
    # prec: 0 anywhere, 1 operand of +, 2 operand of *
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, Const):
        return f"c{t.index}"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Succ):
        return f"S({_render_term(t.arg, 0)})"
    if isinstance(t, Add):
        s = f"{_render_term(t.left, 1)}+{_render_term(t.right, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(t, Mul):
        s = f"{_render_term(t.left, 2)}*{_render_term(t.right, 3)}"
        return f"({s})" if prec > 2 else s
    raise TypeError(f"not a term: {t!r}")


def _render_formula(f: Formula, prec: int) -> str:
    # prec: 0 anywhere, 1 left of ->
    if isinstance(f, Atom):
        return f"{_render_term(f.lhs, 0)}={_render_term(f.rhs, 0)}"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Impl):
        s = f"{_render_formula(f.ante, 1)} -> {_render_formula(f.cons, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(f, Forall):
        s = f"forall {f.var}. {_render_formula(f.body, 0)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f"not a formula: {f!r}")


def render(x: Formula | Term) -> str:
    if isinstance(x, (Atom, Prop, Bot, Impl, Forall)):
        return _render_formula(x, 0)
    return _render_term(x, 0)


# -- parsing ---------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


class UnknownConstantError(ParseError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<meta>\?[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<num>\d+)|(?P<sym>[()+*=~.]))"
)
_KEYWORDS = {"forall", "bot", "S", "ANY"}
_CONST = re.compile(r"c(\d+)$")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            if rest.strip():
                raise ParseError(f"unexpected character {rest.strip()[0]!r}",
                                 len(text) - len(rest.lstrip()), text)
            break
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, sig: Signature, metavars: bool = False):
        self.text = text
        self.sig = sig
        self.metavars = metavars
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        shown = tok[1] or "end of input"
        raise ParseError(f"{msg}, found {shown!r}", tok[2], self.text)

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value or tok[0] == "meta":
            self.fail(f"expected {value!r}")
        return self.advance()

    def at_end(self):
        if self.peek()[0] != "eof":
            self.fail("unexpected trailing input")

    # term := sum ; sum := prod ("+" prod)* ; prod := primary ("*" primary)*
    def term(self) -> Term:
        t = self.product()
        while self.peek()[1] == "+":
            self.advance()
            t = Add(t, self.product())
        return t

    def product(self) -> Term:
        t = self.primary()
        while self.peek()[1] == "*":
            self.advance()
            t = Mul(t, self.primary())
        return t

    def primary(self) -> Term:
        kind, value, pos = self.peek()
        if kind == "num":
            if value != "0":
                self.fail("only the numeral 0 may be written as a digit")
            self.advance()
            return ZERO
        if kind == "sym" and value == "(":
            self.advance()
            t = self.term()
            self.expect(")")
            return t
        if kind == "meta":
            if not self.metavars:
                self.fail("metavariables are only allowed in rule files")
            self.advance()
            return Var(value[1:])
        if kind == "ident":
            if value == "S":
                self.advance()
                self.expect("(")
                t = self.term()
                self.expect(")")
                return Succ(t)
            m = _CONST.match(value)
            if m:
                index = int(m.group(1))
                if not self.sig.has_constant(index):
                    raise UnknownConstantError(
                        f"unknown constant {value!r} (signature has "
                        f"{self.sig.n_constants} extra constants)", pos, self.text)
                self.advance()
                return Const(index)
            if value in _KEYWORDS:
                self.fail("expected a term")
            self.advance()
            return Var(value)
        self.fail("expected a term")

    def formula(self) -> Formula:
        if self.peek()[1] == "forall":
            return self.quantified()
        left = self.unary()
        if self.peek()[0] == "arrow":
            self.advance()
            return Impl(left, self.formula())
        return left

    def quantified(self) -> Formula:
        self.advance()
        kind, name, _ = self.peek()
        if kind != "ident" or name in _KEYWORDS or _CONST.match(name):
            self.fail("expected a variable after 'forall'")
        self.advance()
        self.expect(".")
        return Forall(name, self.formula())

    def unary(self) -> Formula:
        kind, value, _ = self.peek()
        if value == "~" and kind == "sym":
            self.advance()
            return Impl(self.unary(), BOT)
        if value == "bot" and kind == "ident":
            self.advance()
            return BOT
        if value == "forall" and kind == "ident":
            return self.quantified()
        if value == "(" and kind == "sym":
            # "(" opens either a term (as in "(0+0)=0") or a formula
            save = self.i
            try:
                return self.atom()
            except ParseError as exc:
                if isinstance(exc, UnknownConstantError):
                    raise
                term_error = exc
            self.i = save
            self.advance()
            try:
                f = self.formula()
                self.expect(")")
            except ParseError as exc:
                raise max(exc, term_error, key=lambda e: e.pos) from None
            return f
        return self.atom()

    def atom(self) -> Formula:
        start = self.peek()
        lhs = self.term()
        if self.peek()[1] == "=":
            self.advance()
            return Atom(lhs, self.term())
        if isinstance(lhs, Var) and start[0] == "ident":
            return Prop(lhs.name)
        self.fail("expected '='")


def parse_term(text: str, sig: Signature = BASE_SIGNATURE, *, metavars: bool = False) -> Term:
    p = _Parser(text, sig, metavars)
    t = p.term()
    p.at_end()
    return t


def parse_formula(text: str, sig: Signature = BASE_SIGNATURE, *,
                  require_closed: bool = False) -> Formula:
    p = _Parser(text, sig)
    f = p.formula()
    p.at_end()
    if require_closed:
        unbound = free_vars(f)
        if unbound:
            raise ParseError(f"unbound variable {sorted(unbound)[0]!r} in closed formula",
                             0, text)
    return f


def parse_atom(text: str, sig: Signature = BASE_SIGNATURE, *, metavars: bool = False):
    """Parse an equation or a 0-ary atom (no connectives)."""
    p = _Parser(text, sig, metavars)
    a = p.atom()
    p.at_end()
    return a


# -- enumeration -----------------------------------------------------------

@lru_cache(maxsize=None)
def terms_of_size(sig: Signature, size: int) -> tuple[Term, ...]:
    """All closed terms with exactly ``size`` nodes, in a fixed order."""
    if size < 1:
        return ()
    if size == 1:
        return (ZERO,) + tuple(Const(i) for i in range(1, sig.n_constants + 1))
    out: list[Term] = [Succ(t) for t in terms_of_size(sig, size - 1)]
    for ctor in (Add, Mul):
        for k in range(1, size - 1):
            for a in terms_of_size(sig, k):
                for b in terms_of_size(sig, size - 1 - k):
                    out.append(ctor(a, b))
    return tuple(out)


def closed_terms_upto(sig: Signature, size: int) -> Iterator[Term]:
    """Every closed term with at most ``size`` nodes, smallest first."""
    if size < 1:
        raise ValueError("size must be at least 1")
    for n in range(1, size + 1):
        yield from terms_of_size(sig, n)
