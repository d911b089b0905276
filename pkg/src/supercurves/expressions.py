"""Text grammar for ring elements.

Grammar (whitespace is insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := NUMBER | 'i' | NAME | '(' expr ')'
    NUMBER := INT ('/' INT)?
    NAME   := z | t | th<k> | eta<k> | a named constant

Serialization sorts terms by ``(e, S)`` and writes coefficients as
``p/q+r/s*i`` (parenthesised inside a product).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Mapping, Optional

from .gaussian import GaussianRational, format_coefficient
from .superalgebra import AlgebraError, AlgebraSignature, SuperElement

__all__ = ["ParseError", "parse_expression", "serialize", "format_term"]


class ParseError(AlgebraError):
    """Syntax or lexical error; ``position`` is a 0-based column."""

    def __init__(self, message: str, position: int, text: str = "", line: Optional[int] = None):
        self.message = message
        self.position = position
        self.text = text
        self.line = line
        where = f"line {line}, column {position + 1}" if line is not None else f"column {position + 1}"
        super().__init__(f"{message} at {where}")


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\s*/\s*\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^()]))")


@dataclass
class _Tok:
    kind: str
    value: str
    pos: int


def _tokenize(text: str) -> List[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, sig: AlgebraSignature, constants: Mapping[str, GaussianRational]):
        self.text = text
        self.sig = sig
        self.constants = constants
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, tok.pos, self.text)

    def expect(self, value):
        t = self.peek()
        if t.value != value or t.kind not in ("op",):
            raise self.error(f"expected {value!r}")
        return self.take()

    def parse(self) -> SuperElement:
        if self.peek().kind == "end":
            raise self.error("empty expression")
        v = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected token {self.peek().value!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek().kind == "op" and self.peek().value in "+-":
            op = self.take().value
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self):
        v = self.unary()
        while self.peek().kind == "op" and self.peek().value == "*":
            self.take()
            v = v * self.unary()
        return v

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.value in "+-":
            self.take()
            v = self.unary()
            return -v if t.value == "-" else v
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "op" and self.peek().value == "^":
            self.take()
            neg = False
            if self.peek().kind == "op" and self.peek().value == "-":
                self.take()
                neg = True
            t = self.peek()
            if t.kind != "num" or "/" in t.value:
                raise self.error("expected an integer exponent")
            self.take()
            k = int(t.value)
            try:
                return base ** (-k if neg else k)
            except AlgebraError as exc:
                raise ParseError(str(exc), t.pos, self.text) from None
        return base

    def atom(self):
        t = self.take()
        sig = self.sig
        if t.kind == "num":
            parts = [p.strip() for p in t.value.split("/")]
            if len(parts) == 2:
                if int(parts[1]) == 0:
                    raise ParseError("zero denominator", t.pos, self.text)
                return sig.const(Fraction(int(parts[0]), int(parts[1])))
            return sig.const(int(parts[0]))
        if t.kind == "name":
            name = t.value
            if name == "i":
                return sig.const(GaussianRational(0, 1))
            if name in ("z", "t"):
                if name != sig.even_name:
                    raise ParseError(f"even variable is {sig.even_name!r}, not {name!r}", t.pos, self.text)
                return sig.z()
            m = re.fullmatch(r"th([1-9][0-9]*)", name)
            if m:
                k = int(m.group(1))
                if k > sig.N:
                    raise ParseError(f"{name} exceeds N={sig.N}", t.pos, self.text)
                return sig.theta(k)
            m = re.fullmatch(r"eta([1-9][0-9]*)", name)
            if m:
                k = int(m.group(1))
                if k > sig.M:
                    raise ParseError(f"{name} exceeds M={sig.M}", t.pos, self.text)
                return sig.eta(k)
            if name in self.constants:
                return sig.const(self.constants[name])
            raise ParseError(f"unknown identifier {name!r}", t.pos, self.text)
        if t.kind == "op" and t.value == "(":
            v = self.expr()
            if not (self.peek().kind == "op" and self.peek().value == ")"):
                raise self.error("expected ')'")
            self.take()
            return v
        if t.kind == "end":
            raise ParseError("unexpected end of input", t.pos, self.text)
        raise ParseError(f"unexpected token {t.value!r}", t.pos, self.text)


def parse_expression(text: str, signature: AlgebraSignature,
                     constants: Optional[Mapping[str, GaussianRational]] = None) -> SuperElement:
    """Parse ``text`` into an element of ``signature``.

    >>> from supercurves.superalgebra import AlgebraSignature
    >>> str(parse_expression("th1*th1 + 1/2*i*z^-1", AlgebraSignature()))
    '1/2*i*z^-1'
    """
    return _Parser(text, signature, constants or {}).parse()


def _needs_parens(c: GaussianRational) -> bool:
    return bool(c.re) and bool(c.im)


def format_term(sig: AlgebraSignature, e: int, S, c: GaussianRational) -> str:
    """Format one term; the leading sign is kept in the coefficient."""
    factors = []
    if e:
        factors.append(sig.even_name if e == 1 else f"{sig.even_name}^{e}")
    factors.extend(sig.generator_name(s) for s in S)
    if not factors:
        coef = format_coefficient(c)
        return f"({coef})" if _needs_parens(c) else coef
    if c == 1:
        return "*".join(factors)
    if c == -1:
        return "-" + "*".join(factors)
    coef = format_coefficient(c)
    if _needs_parens(c):
        coef = f"({coef})"
    return coef + "*" + "*".join(factors)


def serialize(x: SuperElement) -> str:
    """Canonical text: terms sorted by ``(e, S)``."""
    parts = []
    for (e, S), c in x.sorted_terms():
        parts.append(format_term(x.signature, e, S, c))
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out
