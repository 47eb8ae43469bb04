"""A small expression language for graphing functions.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*`` and ``/``)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" int)?
    int    := "-"? DIGITS | "(" "-"? DIGITS ")"
    atom   := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

Decimal literals are read as exact rationals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ParseError, VariableMismatch
from .jet import Jet, JetSpace, analytic_lift

FUNCTIONS = ("exp", "log", "sin", "cos", "arcsin", "arcsinh", "sqrt")
_ALIASES = {"ln": "log", "asin": "arcsin", "asinh": "arcsinh"}


@dataclass(frozen=True)
class Num:
    text: str

    @property
    def value(self) -> Fraction:
        return Fraction(self.text)


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Func]

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*|\.\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        start = m.start(kind)
        value = m.group(kind)
        if kind == "op" and value == "**":
            value = "^"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str, tok=None):
        tok = tok or self.peek()
        what = "end of input" if tok[0] == "end" else repr(tok[1])
        raise ParseError(f"{message}, found {what}", tok[2], self.text)

    def expect(self, op: str):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != op:
            self.fail(f"expected {op!r}")
        return self.take()

    def is_op(self, *ops) -> bool:
        tok = self.peek()
        return tok[0] == "op" and tok[1] in ops

    def parse(self) -> Expr:
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail("unexpected token")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.is_op("+", "-"):
            op = self.take()[1]
            right = self.term()
            node = Add(node, right) if op == "+" else Sub(node, right)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.is_op("*", "/"):
            op = self.take()[1]
            right = self.unary()
            node = Mul(node, right) if op == "*" else Div(node, right)
        return node

    def unary(self) -> Expr:
        if self.is_op("-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.is_op("^"):
            self.take()
            base = Pow(base, self.integer())
            if self.is_op("^"):
                self.fail("chained powers need parentheses")
        return base

    def integer(self) -> int:
        paren = self.is_op("(")
        if paren:
            self.take()
        sign = 1
        if self.is_op("-"):
            self.take()
            sign = -1
        tok = self.peek()
        if tok[0] != "num" or not tok[1].isdigit():
            self.fail("exponent must be an integer")
        self.take()
        if paren:
            self.expect(")")
        return sign * int(tok[1])

    def atom(self) -> Expr:
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return Num(tok[1])
        if tok[0] == "name":
            self.take()
            name = tok[1]
            if self.is_op("("):
                fname = _ALIASES.get(name, name)
                if fname not in FUNCTIONS:
                    raise ParseError(f"unknown function {name!r}", tok[2], self.text)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(fname, arg)
            if name in FUNCTIONS or name in _ALIASES:
                self.fail(f"function {name!r} needs an argument in parentheses")
            return Var(name)
        if self.is_op("("):
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expected a number, name or '('")


def parse(text: str) -> Expr:
    """Parse expression text into an AST; raises :class:`ParseError`."""
    return _Parser(text).parse()


_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), 5)


def to_text(e: Expr) -> str:
    """Render an AST so that ``parse(to_text(e)) == e``."""
    if isinstance(e, Num):
        return e.text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Pow):
        b = to_text(e.base)
        if _prec(e.base) <= 4:
            b = f"({b})"
        return f"{b}^{e.exponent}"
    if isinstance(e, Neg):
        a = to_text(e.arg)
        if _prec(e.arg) < 3:
            a = f"({a})"
        return f"-{a}"
    p = _prec(e)
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    left = to_text(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_text(e.right)
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left}{op}{right}"


def variables(e: Expr) -> list[str]:
    """Variable names in order of first appearance."""
    out: list[str] = []

    def walk(node):
        if isinstance(node, Var):
            if node.name not in out:
                out.append(node.name)
        elif isinstance(node, (Neg, Func)):
            walk(node.arg)
        elif isinstance(node, Pow):
            walk(node.base)
        elif isinstance(node, Num):
            pass
        else:
            walk(node.left)
            walk(node.right)

    walk(e)
    return out


def default_vars(e: Expr) -> tuple[str, ...]:
    """Variables with the conventional names first (x, y, then x1, y1, ...)."""
    found = variables(e)
    preferred = ["x", "y", "x1", "y1", "x2", "y2", "x3", "y3", "v"]
    head = [v for v in preferred if v in found]
    return tuple(head + [v for v in found if v not in head])


def eval_jet(e: Expr | str, space: JetSpace, order: int) -> Jet:
    """Jet of the expression at the base point of ``space``."""
    if isinstance(e, str):
        e = parse(e)
    for v in variables(e):
        if v not in space.vars:
            raise VariableMismatch(f"expression uses {v!r} which is not among {space.vars}")

    def ev(node) -> Jet:
        if isinstance(node, Num):
            return space.const(space.backend.scalar(node.value), order)
        if isinstance(node, Var):
            return space.var(node.name, order)
        if isinstance(node, Neg):
            return -ev(node.arg)
        if isinstance(node, Add):
            return ev(node.left) + ev(node.right)
        if isinstance(node, Sub):
            return ev(node.left) - ev(node.right)
        if isinstance(node, Mul):
            return ev(node.left) * ev(node.right)
        if isinstance(node, Div):
            return ev(node.left) / ev(node.right)
        if isinstance(node, Pow):
            return ev(node.base) ** node.exponent
        if isinstance(node, Func):
            return analytic_lift(node.name, ev(node.arg))
        raise TypeError(f"not an expression node: {node!r}")

    return ev(e)
