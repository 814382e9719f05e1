"""Gaussian-rational scalars.

Real values are stored as plain ``gmpy2.mpq`` (fast path); only values with a
nonzero imaginary part become :class:`Scalar`.  Use :func:`scalar` to coerce
anything into this canonical form.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)


class Scalar:
    """Exact complex number re + im*i with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=ZERO):
        self.re = mpq(re)
        self.im = mpq(im)

    def __repr__(self):
        return f"Scalar({self.re}, {self.im})"

    def __str__(self):
        return format_scalar(self)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        if is_rational(other):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __add__(self, o):
        if isinstance(o, Scalar):
            return scalar_parts(self.re + o.re, self.im + o.im)
        if is_rational(o):
            return Scalar(self.re + o, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, Scalar):
            return scalar_parts(self.re - o.re, self.im - o.im)
        if is_rational(o):
            return Scalar(self.re - o, self.im)
        return NotImplemented

    def __rsub__(self, o):
        if is_rational(o):
            return Scalar(o - self.re, -self.im)
        return NotImplemented

    def __mul__(self, o):
        if isinstance(o, Scalar):
            return scalar_parts(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)
        if is_rational(o):
            return scalar_parts(self.re * o, self.im * o)
        return NotImplemented

    __rmul__ = __mul__

    def conjugate(self):
        return Scalar(self.re, -self.im)

    def norm2(self):
        return self.re * self.re + self.im * self.im

    def inverse(self):
        n = self.norm2()
        if n == 0:
            raise ZeroDivisionError("inverse of zero scalar")
        return scalar_parts(self.re / n, -self.im / n)

    def __truediv__(self, o):
        if isinstance(o, Scalar):
            return self * o.inverse()
        if is_rational(o):
            return scalar_parts(self.re / o, self.im / o)
        return NotImplemented

    def __rtruediv__(self, o):
        if is_rational(o):
            return self.inverse() * o
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out


I = Scalar(0, 1)


def is_rational(x):
    return isinstance(x, (int, Rational)) or type(x) is type(ONE)


def scalar_parts(re, im):
    if im == 0:
        return mpq(re)
    return Scalar(re, im)


def scalar(x):
    """Coerce ints, Fractions, mpq, Scalars, rational strings or exact
    complex tuples into canonical scalar form."""
    if isinstance(x, Scalar):
        return scalar_parts(x.re, x.im)
    if type(x) is type(ONE):
        return x
    if isinstance(x, (int, Fraction, Rational)):
        return mpq(x)
    if isinstance(x, str):
        from .text import parse_scalar
        return parse_scalar(x)
    if isinstance(x, tuple) and len(x) == 2:
        return scalar_parts(mpq(x[0]), mpq(x[1]))
    if isinstance(x, float):
        return mpq(x)
    if isinstance(x, complex):
        return scalar_parts(mpq(x.real), mpq(x.imag))
    raise TypeError(f"cannot coerce {x!r} to an exact scalar")


def real_part(x):
    return x.re if isinstance(x, Scalar) else mpq(x)


def imag_part(x):
    return x.im if isinstance(x, Scalar) else ZERO


def to_complex(x):
    if isinstance(x, Scalar):
        return complex(x)
    return complex(float(x))


def format_rational(q):
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_scalar(x):
    """Text form: ``3/2``, ``-i``, ``1/2*i``, ``(3/2 + 1/2*i)``."""
    re, im = real_part(x), imag_part(x)
    if im == 0:
        return format_rational(re)
    if im == 1:
        imag = "i"
    elif im == -1:
        imag = "-i"
    else:
        imag = f"{format_rational(im)}*i"
    if re == 0:
        return imag
    sign = "-" if im < 0 else "+"
    mag = imag[1:] if im < 0 else imag
    return f"({format_rational(re)} {sign} {mag})"
