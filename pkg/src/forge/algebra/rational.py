"""Rational functions with factored denominators.

No multivariate gcd is ever computed.  A denominator is a map from monic
polynomial factors to positive exponents; the factors come from a small
per-ring registry of known irreducibles, so trial division is enough to keep
expressions tidy.  Zero tests only look at the numerator.
"""
from __future__ import annotations

from ..errors import DegenerateSubstitution, DenominatorZero
from .poly import Poly, PolyRing
from .scalar import ONE, ZERO, Scalar, is_rational, scalar

_KNOWN: dict[PolyRing, list[Poly]] = {}


def register_factors(ring, polys):
    """Record known irreducible factors of ``ring`` (monic-normalized)."""
    known = _KNOWN.setdefault(ring, [])
    for p in polys:
        if not isinstance(p, Poly):
            continue
        if p.ring is not ring:
            p = p.to_ring(ring)
        if p.is_constant():
            continue
        _, m = p.monic()
        if m not in known:
            known.append(m)
    return list(known)


def known_factors(ring):
    return list(_KNOWN.get(ring, ()))


def split_known(poly, known=None):
    """Write ``poly`` = c * prod(g**e) * rest using trial division by the
    known factors.  Returns (c, {factor: exp}) where any non-constant leftover
    is itself recorded as a (monic) factor."""
    if poly.is_zero():
        raise ZeroDivisionError("cannot factor the zero polynomial")
    if known is None:
        known = _KNOWN.get(poly.ring, ())
    factors: dict[Poly, int] = {}
    rest = poly
    pvars = None
    for g in known:
        if rest.is_constant():
            break
        if g.degree() > rest.degree():
            continue
        if pvars is None:
            pvars = set(rest.variables())
        if not set(g.variables()) <= pvars:
            continue
        while True:
            q = rest.exact_div(g)
            if q is None:
                break
            factors[g] = factors.get(g, 0) + 1
            rest = q
            pvars = None
            if rest.is_constant():
                break
        if pvars is None and not rest.is_constant():
            pvars = set(rest.variables())
    if rest.is_constant():
        return rest.constant_value(), factors
    c, m = rest.monic()
    factors[m] = factors.get(m, 0) + 1
    return c, factors


class RationalFn:
    """numerator / prod(factor**exp).  Immutable."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None):
        self.num = num
        self.den = den if den else {}
        self._hash = None

    @property
    def ring(self):
        return self.num.ring

    @classmethod
    def const(cls, ring, c):
        return cls(ring.const(c))

    @classmethod
    def from_poly(cls, p):
        return cls(p)

    @classmethod
    def from_factored(cls, num, den_polys):
        """``num`` over the product of the given polynomials (each split
        against the known factors)."""
        c_total = ONE
        den = {}
        for p, e in den_polys:
            c, fs = split_known(p)
            c_total = c_total * c ** e
            for g, k in fs.items():
                den[g] = den.get(g, 0) + k * e
        return cls(num.scale(ONE / c_total), den)

    def __repr__(self):
        from .text import format_rf
        return f"RationalFn({format_rf(self)})"

    def __str__(self):
        from .text import format_rf
        return format_rf(self)

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_polynomial(self):
        return not self.den

    def value_if_constant(self):
        if not self.den and self.num.is_constant():
            return self.num.constant_value()
        return None

    def den_poly(self):
        out = self.ring.one()
        for f, e in self.den.items():
            out = out * f ** e
        return out

    def _lift(self, other):
        if isinstance(other, RationalFn):
            if other.ring is not self.ring:
                other = other.to_ring(self.ring)
            return other
        if isinstance(other, Poly):
            return RationalFn(other.to_ring(self.ring))
        if is_rational(other) or isinstance(other, Scalar):
            return RationalFn(self.ring.const(other))
        raise TypeError(f"cannot combine RationalFn with {type(other).__name__}")

    def __eq__(self, other):
        try:
            other = self._lift(other)
        except (TypeError, ValueError):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        # equal values may have different representations; only hash the
        # canonical zero/constant cases consistently
        v = self.value_if_constant()
        if v is not None:
            return hash(v)
        return hash(self.ring.names)

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __add__(self, other):
        other = self._lift(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return RationalFn(self.num + other.num, self.den)
        lcm = dict(self.den)
        for f, e in other.den.items():
            if lcm.get(f, 0) < e:
                lcm[f] = e
        a = self.num * _cofactor(lcm, self.den, self.ring)
        b = other.num * _cofactor(lcm, other.den, self.ring)
        return RationalFn(a + b, lcm)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if is_rational(other) or isinstance(other, Scalar):
            return RationalFn(self.num.scale(other), self.den)
        other = self._lift(other)
        if self.num.is_zero() or other.num.is_zero():
            return RationalFn(self.ring.zero())
        if not other.den:
            den = self.den
        elif not self.den:
            den = other.den
        else:
            den = dict(self.den)
            for f, e in other.den.items():
                den[f] = den.get(f, 0) + e
        return RationalFn(self.num * other.num, den)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        c, fs = split_known(self.num, list(self.den) + known_factors(self.ring))
        num = self.den_poly().scale(ONE / c)
        return RationalFn(num, fs).reduce()

    def __truediv__(self, other):
        if is_rational(other) or isinstance(other, Scalar):
            return RationalFn(self.num.scale(ONE / scalar(other)), self.den)
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            raise ValueError("integer exponents only")
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return RationalFn(self.ring.one())
        return RationalFn(self.num ** k, {f: e * k for f, e in self.den.items()})

    def reduce(self):
        """Cancel denominator factors that divide the numerator."""
        if not self.den or self.num.is_zero():
            return RationalFn(self.num) if self.num.is_zero() else self
        num = self.num
        den = {}
        for f, e in self.den.items():
            while e:
                q = num.exact_div(f)
                if q is None:
                    break
                num, e = q, e - 1
            if e:
                den[f] = e
        return RationalFn(num, den)

    def diff(self, var):
        ring = self.ring
        if var not in ring.index:
            return RationalFn(ring.zero())
        nv = self.num.diff(var)
        moving = [(f, e, f.diff(var)) for f, e in self.den.items()]
        moving = [(f, e, df) for f, e, df in moving if not df.is_zero()]
        if not moving:
            return RationalFn(nv, self.den)
        prod = ring.one()
        for f, _, _ in moving:
            prod = prod * f
        num = nv * prod
        for j, (f, e, df) in enumerate(moving):
            others = ring.one()
            for k, (g, _, _) in enumerate(moving):
                if k != j:
                    others = others * g
            num = num - self.num * df * others * e
        den = dict(self.den)
        for f, e, _ in moving:
            den[f] = e + 1
        return RationalFn(num, den)

    def evaluate(self, point, convert=None):
        """Exact value when point and coefficients are exact scalars;
        ``convert`` allows evaluation into floats/mpmath."""
        top = self.num.evaluate(point, convert)
        bottom = None
        for f, e in self.den.items():
            v = f.evaluate(point, convert)
            if v == 0:
                raise DenominatorZero(str(f), dict(point))
            v = v ** e
            bottom = v if bottom is None else bottom * v
        if bottom is None:
            return top
        return top / bottom

    def to_ring(self, ring):
        if ring is self.ring:
            return self
        return RationalFn(self.num.to_ring(ring), {f.to_ring(ring): e for f, e in self.den.items()})

    def substitute(self, images, target):
        """Compose with ``images`` (name -> RationalFn/Poly over ``target``);
        variables of self missing from ``images`` map to themselves."""
        images = _complete_images(self.ring, images, target)
        if all(im.is_polynomial() for im in images.values()):
            pimg = {v: im.num for v, im in images.items()}
            num = self.num.compose(pimg, target)
            c_total = ONE
            den = {}
            for f, e in self.den.items():
                fp = f.compose(pimg, target)
                if fp.is_zero():
                    raise DegenerateSubstitution(f"denominator factor {f} pulls back to 0")
                c, fs = split_known(fp)
                c_total = c_total * c ** e
                for g, k in fs.items():
                    den[g] = den.get(g, 0) + k * e
            return RationalFn(num.scale(ONE / c_total), den)
        one = RationalFn(target.one())
        conv = lambda c: one * c
        top = self.num.evaluate(images, conv)
        out = top
        for f, e in self.den.items():
            fv = f.evaluate(images, conv)
            if fv.is_zero():
                raise DegenerateSubstitution(f"denominator factor {f} pulls back to 0")
            out = out * fv.inverse() ** e
        return out


def _complete_images(ring, images, target):
    out = {}
    for v in ring.names:
        if v in images:
            im = images[v]
        elif v in target.index:
            im = target.gen(v)
        else:
            continue
        if isinstance(im, RationalFn):
            im = im.to_ring(target) if im.ring is not target else im
        elif isinstance(im, Poly):
            im = RationalFn(im.to_ring(target))
        else:
            im = RationalFn(target.const(im))
        out[v] = im
    return out


def _cofactor(lcm, den, ring):
    out = None
    for f, e in lcm.items():
        k = e - den.get(f, 0)
        if k:
            p = f ** k
            out = p if out is None else out * p
    return out if out is not None else ring.one()


def rf(ring, x):
    """Coerce a scalar/Poly/RationalFn into a RationalFn over ``ring``."""
    if isinstance(x, RationalFn):
        return x.to_ring(ring)
    if isinstance(x, Poly):
        return RationalFn(x.to_ring(ring))
    return RationalFn(ring.const(x))


def rf_eval(r, point):
    """Exact evaluation of a rational function at a point of exact scalars."""
    pt = {k: scalar(v) for k, v in point.items()}
    return scalar(r.evaluate(pt))
