"""Canonical text form for polynomials and rational functions.

Example: ``(3/2 + 1/2*i)*x^2*y / (x * f^2)`` where ``f`` is an alias for a
named polynomial.  ``parse_rf(format_rf(r, aliases), ring, aliases)``
reproduces ``r`` including its denominator factorization.
"""
from __future__ import annotations

import re

from gmpy2 import mpq

from ..errors import ParseError
from .poly import Poly, PolyRing, format_poly
from .rational import RationalFn
from .scalar import I, ONE, scalar

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def _is_atom_poly(p, aliases):
    if any(p == q for q in aliases.values() if q.ring is p.ring):
        return True
    return len(p.terms) == 1 and p.leading()[1] == 1 and p.degree() == 1


def _factor_text(p, aliases):
    for name, q in aliases.items():
        if q.ring is p.ring and p == q:
            return name
    s = format_poly(p)
    return s if _is_atom_poly(p, aliases) else f"({s})"


def _factor_key(item):
    p, e = item
    return (p.degree(), len(p.terms), format_poly(p))


def format_rf(r, aliases=None):
    aliases = aliases or {}
    num = format_poly(r.num)
    if not r.den:
        return num
    if len(r.num.terms) > 1:
        num = f"({num})"
    items = []
    for p, e in sorted(r.den.items(), key=_factor_key):
        t = _factor_text(p, aliases)
        items.append(t if e == 1 else f"{t}^{e}")
    if len(items) == 1 and r.den[next(iter(r.den))] == 1:
        return f"{num} / {items[0]}"
    return f"{num} / ({' * '.join(items)})"


def format_form(form, aliases=None):
    from .forms import OneForm
    if form.is_zero():
        return "0"
    parts = []
    if isinstance(form, OneForm):
        for v in form.chart.coords:
            if v in form.coeffs:
                parts.append(f"({format_rf(form.coeffs[v], aliases)})*d{v}")
    else:
        for (v, w), c in form.coeffs.items():
            parts.append(f"({format_rf(c, aliases)})*d{v}^d{w}")
    return " + ".join(parts)


class _Node:
    """Parsed value; ``factors`` is kept while the node is a pure product so a
    division can turn it into denominator factors."""

    __slots__ = ("value", "const", "factors")

    def __init__(self, value, const=None, factors=None):
        self.value = value
        self.const = const
        self.factors = factors


class _Parser:
    def __init__(self, text, ring, aliases):
        self.ring = ring
        self.aliases = aliases or {}
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"bad character at {pos} in {text!r}")
            self.toks.append(m.groups())
            pos = m.end()
        self.i = 0

    def peek(self):
        if self.i < len(self.toks):
            num, ident, op = self.toks[self.i]
            return num or ident or op
        return None

    def take(self, expected=None):
        t = self.peek()
        if expected is not None and t != expected:
            raise ParseError(f"expected {expected!r}, got {t!r}")
        self.i += 1
        return t

    def parse(self):
        node = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input at token {self.peek()!r}")
        return node.value

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            val = node.value + rhs.value if op == "+" else node.value - rhs.value
            node = _Node(val)
        return node

    def term(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            node = self._mul(node, rhs) if op == "*" else self._div(node, rhs)
        return node

    def _mul(self, a, b):
        val = a.value * b.value
        if a.factors is not None and b.factors is not None:
            return _Node(val, a.const * b.const, a.factors + b.factors)
        return _Node(val)

    def _div(self, a, b):
        if b.factors is not None:
            den = {}
            c = b.const
            for p, e in b.factors:
                lc, m = p.monic()
                c = c * lc ** e
                den[m] = den.get(m, 0) + e
            if c == 0:
                raise ParseError("division by zero")
            val = a.value * RationalFn(self.ring.const(ONE / c), den)
        else:
            val = a.value / b.value
        return _Node(val)

    def unary(self):
        if self.peek() == "-":
            self.take()
            node = self.unary()
            fac = node.factors
            return _Node(-node.value, -node.const if fac is not None else None, fac)
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek() == "^":
            self.take()
            neg = False
            if self.peek() == "-":
                self.take()
                neg = True
            tok = self.take()
            if not tok or not tok.isdigit():
                raise ParseError(f"integer exponent expected, got {tok!r}")
            k = int(tok)
            if neg:
                return _Node(node.value ** (-k))
            fac = None
            if node.factors is not None:
                fac = [(p, e * k) for p, e in node.factors]
            return _Node(node.value ** k, node.const ** k if fac is not None else None, fac)
        return node

    def atom(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        num, ident, op = self.toks[self.i]
        if num:
            self.take()
            c = mpq(num)
            return _Node(RationalFn(self.ring.const(c)), c, [])
        if ident:
            self.take()
            if ident == "i":
                return _Node(RationalFn(self.ring.const(I)), I, [])
            if ident in self.aliases:
                p = self.aliases[ident].to_ring(self.ring)
                return _Node(RationalFn(p), ONE, [(p, 1)])
            if ident in self.ring.index:
                p = self.ring.gen(ident)
                return _Node(RationalFn(p), ONE, [(p, 1)])
            raise ParseError(f"unknown variable {ident!r}")
        if op == "(":
            self.take()
            node = self.expr()
            self.take(")")
            if node.factors is None and node.value.is_polynomial():
                c = node.value.value_if_constant()
                if c is not None:
                    return _Node(node.value, c, [])
                return _Node(node.value, ONE, [(node.value.num, 1)])
            return node
        raise ParseError(f"unexpected token {op!r}")


def parse_rf(text, ring, aliases=None):
    return _Parser(text, ring, aliases).parse()


def parse_poly(text, ring, aliases=None):
    r = parse_rf(text, ring, aliases).reduce()
    if not r.is_polynomial():
        raise ParseError(f"{text!r} is not a polynomial")
    return r.num


def parse_scalar(text):
    r = parse_rf(text, PolyRing(()))
    v = r.value_if_constant()
    if v is None:
        raise ParseError(f"{text!r} is not a constant")
    return scalar(v)
