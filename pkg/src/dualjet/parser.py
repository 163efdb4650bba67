"""Recursive-descent parser for the scalar expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' ['-'] number)?
    base   := number | ident | '(' expr ')' | func '(' expr ')'
    func   := sin | cos | exp | log | sqrt | neg
    ident  := t<digits> | x<digits> | p<digits>_<digits>

Whitespace is insignificant. The optional sign after '^' is a superset of
the base grammar so printed expressions with negative exponents re-parse;
inputs without signed exponents parse identically either way.
"""

from __future__ import annotations

import re

from . import expr as ex
from .chart import ChartSpec

__all__ = ["parse_scalar", "ParseError", "UnknownVariableError"]


class ParseError(ValueError):
    """Malformed source; ``position`` is the 0-based offset of the problem."""

    def __init__(self, message: str, position: int):
        super().__init__(f"syntax error at offset {position}: {message}")
        self.position = position


class UnknownVariableError(ParseError):
    def __init__(self, name: str, position: int):
        ValueError.__init__(self, f"unknown variable {name!r} at offset {position}")
        self.position = position
        self.name = name


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

_VAR_NAME = re.compile(r"^(?:t\d+|x\d+|p\d+_\d+)$")

_FUNCS = {"sin": ex.sin, "cos": ex.cos, "exp": ex.exp, "log": ex.log,
          "sqrt": ex.sqrt, "neg": ex.neg}


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, chart: ChartSpec):
        self.source = source
        self.chart = chart
        self.tokens = _tokenize(source)
        self.cursor = 0

    def peek(self):
        return self.tokens[self.cursor]

    def advance(self):
        token = self.tokens[self.cursor]
        self.cursor += 1
        return token

    def expect_op(self, symbol):
        kind, text, pos = self.peek()
        if kind != "op" or text != symbol:
            raise ParseError(f"expected {symbol!r}", pos)
        return self.advance()

    def parse(self) -> ex.Expr:
        node = self.expression()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return node

    def expression(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.term()
                node = ex.add(node, rhs) if text == "+" else ex.sub(node, rhs)
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                rhs = self.factor()
                node = ex.mul(node, rhs) if text == "*" else ex.div(node, rhs)
            else:
                return node

    def factor(self):
        node = self.base()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            sign = 1.0
            kind, text, pos = self.peek()
            if kind == "op" and text == "-":
                self.advance()
                sign = -1.0
                kind, text, pos = self.peek()
            if kind != "number":
                raise ParseError("expected a numeric exponent after '^'", pos)
            self.advance()
            node = ex.power(node, sign * float(text))
        return node

    def base(self):
        kind, text, pos = self.advance()
        if kind == "number":
            return ex.constant(float(text))
        if kind == "ident":
            if text in _FUNCS:
                self.expect_op("(")
                inner = self.expression()
                self.expect_op(")")
                return _FUNCS[text](inner)
            if _VAR_NAME.match(text) and self.chart.declares(text):
                return ex.variable(self.chart, text)
            raise UnknownVariableError(text, pos)
        if kind == "op" and text == "(":
            inner = self.expression()
            self.expect_op(")")
            return inner
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {text!r}", pos)


def parse_scalar(source: str, chart: ChartSpec) -> ex.Expr:
    """Parse a scalar expression over the chart variables."""
    return _Parser(source, chart).parse()
