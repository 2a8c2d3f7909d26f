"""Expression trees over the chart variables ``u`` and ``v``.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := number | 'u' | 'v' | 'pi' | ident '(' expr ')' | '(' expr ')'

so ``^`` is right-associative and binds tighter than unary minus:
``-u^2`` is ``Neg(Pow(u, 2))``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import ExpressionSyntaxError, UnknownIdentifierError

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "atan")
VARIABLES = ("u", "v")


class Expression:
    """Base node. Every node remembers the source offset it was parsed from."""

    def variables(self) -> set[str]:
        out: set[str] = set()
        for child in self.children():
            out |= child.variables()
        return out

    def children(self) -> tuple[Expression, ...]:
        return ()

    def is_constant(self) -> bool:
        return not self.variables()

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True, eq=True)
class Num(Expression):
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True, eq=True)
class Var(Expression):
    name: str
    offset: int = field(default=0, compare=False)

    def variables(self):
        return {self.name}


@dataclass(frozen=True, eq=True)
class Pi(Expression):
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    operand: Expression
    offset: int = field(default=0, compare=False)

    def children(self):
        return (self.operand,)


@dataclass(frozen=True, eq=True)
class _Binary(Expression):
    left: Expression
    right: Expression
    offset: int = field(default=0, compare=False)

    def children(self):
        return (self.left, self.right)


class Add(_Binary):
    pass


class Sub(_Binary):
    pass


class Mul(_Binary):
    pass


class Div(_Binary):
    pass


class Pow(_Binary):
    pass


@dataclass(frozen=True, eq=True)
class Call(Expression):
    func: str
    arg: Expression
    offset: int = field(default=0, compare=False)

    def children(self):
        return (self.arg,)


# Convenience constructors matching the function names, e.g. Sin(Var("v")).
def Sin(arg):
    return Call("sin", arg)


def Cos(arg):
    return Call("cos", arg)


_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/", Pow: "^"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | op | end
    text: str
    offset: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos), source)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message, tok=None, cls=ExpressionSyntaxError):
        tok = tok or self.tok
        return cls(message, _byte_offset(self.source, tok.offset), self.source)

    def unexpected(self):
        tok = self.tok
        if tok.kind == "end":
            return self.error("unexpected end of input")
        return self.error(f"unexpected token {tok.text!r}")

    def take(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text):
        if not self.take(text):
            if text == ")":
                raise self.error("unbalanced parenthesis: expected ')'")
            raise self.unexpected()

    def parse(self) -> Expression:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            if self.tok.text == ")":
                raise self.error("unbalanced parenthesis: unmatched ')'")
            raise self.unexpected()
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            tok = self.tok
            self.pos += 1
            node = _BINARY[tok.text](node, self.term(), tok.offset)
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            tok = self.tok
            self.pos += 1
            node = _BINARY[tok.text](node, self.factor(), tok.offset)
        return node

    def factor(self):
        tok = self.tok
        if self.take("-"):
            return Neg(self.factor(), tok.offset)
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.tok
        if self.take("^"):
            return Pow(base, self.factor(), tok.offset)
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "number":
            self.pos += 1
            value = float(tok.text)
            if not math.isfinite(value):
                raise self.error(f"number {tok.text!r} overflows", tok)
            return Num(value, tok.offset)
        if tok.kind == "ident":
            self.pos += 1
            name = tok.text
            if name in VARIABLES:
                return Var(name, tok.offset)
            if name == "pi":
                return Pi(tok.offset)
            if name in FUNCTIONS:
                if not self.take("("):
                    raise self.error(f"expected '(' after function {name!r}")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg, tok.offset)
            raise self.error(f"unknown identifier {name!r}", tok, UnknownIdentifierError)
        if self.take("("):
            node = self.expr()
            self.expect(")")
            return node
        raise self.unexpected()


def parse_expression(source: str) -> Expression:
    """Parse ``source``; errors carry the byte offset of the offending token."""
    return _Parser(source).parse()


def to_source(node: Expression) -> str:
    """Fully parenthesized text that parses back to an identical tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, _Binary):
        return f"({to_source(node.left)} {_SYMBOL[type(node)]} {to_source(node.right)})"
    raise TypeError(f"not an expression node: {node!r}")


def as_expression(value) -> Expression:
    """Accept an Expression, a source string, or a number."""
    if isinstance(value, Expression):
        return value
    if isinstance(value, str):
        return parse_expression(value)
    if isinstance(value, (int, float)):
        return Num(float(value))
    raise TypeError(f"cannot interpret {value!r} as an expression")
