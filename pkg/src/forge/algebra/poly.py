"""Sparse multivariate polynomials with Gaussian-rational coefficients.

Monomials are packed into a single Python int: one 16-bit field per variable
(first variable most significant) topped by a total-degree field.  Comparing
the packed ints therefore compares monomials in graded lexicographic order, and
multiplying monomials is integer addition.
"""
from __future__ import annotations

import heapq

from .scalar import ONE, ZERO, Scalar, format_scalar, is_rational, mpq, scalar

BITS = 16
MASK = (1 << BITS) - 1

_RINGS: dict[tuple, "PolyRing"] = {}


class PolyRing:
    """An ordered list of variable names.  Instances are interned."""

    def __new__(cls, names):
        names = tuple(names)
        ring = _RINGS.get(names)
        if ring is None:
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate variable names in {names}")
            ring = super().__new__(cls)
            ring.names = names
            ring.nvars = len(names)
            ring.index = {v: i for i, v in enumerate(names)}
            ring.shifts = tuple((ring.nvars - 1 - i) * BITS for i in range(ring.nvars))
            ring.deg_shift = ring.nvars * BITS
            ring.var_monos = tuple((1 << ring.deg_shift) | (1 << s) for s in ring.shifts)
            _RINGS[names] = ring
        return ring

    def __getnewargs__(self):
        return (self.names,)

    def __repr__(self):
        return f"PolyRing({', '.join(self.names)})"

    def mono(self, exps):
        m = sum(exps) << self.deg_shift
        for e, s in zip(exps, self.shifts):
            if e < 0 or e > MASK:
                raise ValueError("exponent out of range")
            m |= e << s
        return m

    def exps(self, m):
        return tuple((m >> s) & MASK for s in self.shifts)

    def exponent(self, m, i):
        return (m >> self.shifts[i]) & MASK

    def degree_of(self, m):
        return m >> self.deg_shift

    def divides(self, a, b):
        """True if monomial a divides monomial b."""
        for s in self.shifts:
            if (a >> s) & MASK > (b >> s) & MASK:
                return False
        return True

    def gen(self, name):
        return Poly(self, {self.var_monos[self.index[name]]: ONE})

    def gens(self):
        return tuple(self.gen(v) for v in self.names)

    def const(self, c):
        c = scalar(c)
        return Poly(self, {0: c} if c else {})

    def zero(self):
        return Poly(self, {})

    def one(self):
        return Poly(self, {0: ONE})

    def extend(self, names):
        """Ring with the extra names appended (existing order preserved)."""
        return PolyRing(self.names + tuple(v for v in names if v not in self.index))


def _coerce(ring, other):
    if isinstance(other, Poly):
        if other.ring is not ring:
            other = other.to_ring(ring)
        return other
    return ring.const(other)


class Poly:
    """Immutable sparse polynomial; ``terms`` maps packed monomial -> coeff."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms
        self._hash = None

    @classmethod
    def from_dict(cls, ring, d):
        """Build from {exponent tuple: coefficient}."""
        out = {}
        for e, c in d.items():
            c = scalar(c)
            if c:
                m = ring.mono(e)
                out[m] = out.get(m, ZERO) + c
        return cls(ring, {m: c for m, c in out.items() if c})

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        return format_poly(self)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self):
        return self.terms.get(0, ZERO)

    def __eq__(self, other):
        if isinstance(other, Poly):
            if other.ring is not self.ring:
                try:
                    other = other.to_ring(self.ring)
                except ValueError:
                    return False
            return self.terms == other.terms
        if is_rational(other) or isinstance(other, Scalar):
            return self.terms == ({0: scalar(other)} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring.names, frozenset(self.terms.items())))
        return self._hash

    def __neg__(self):
        return Poly(self.ring, {m: -c for m, c in self.terms.items()})

    def __add__(self, other):
        other = _coerce(self.ring, other)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for m, c in small.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly(self.ring, out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(self.ring, other))

    def __rsub__(self, other):
        return _coerce(self.ring, other) - self

    def scale(self, c):
        c = scalar(c)
        if not c:
            return self.ring.zero()
        if c == 1:
            return self
        return Poly(self.ring, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            if is_rational(other) or isinstance(other, Scalar):
                return self.scale(other)
            return NotImplemented
        if other.ring is not self.ring:
            other = other.to_ring(self.ring)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            ((mb, cb),) = b.items()
            return Poly(self.ring, {m + mb: c * cb for m, c in a.items()})
        out = {}
        get = out.get
        for mb, cb in b.items():
            for ma, ca in a.items():
                k = ma + mb
                out[k] = get(k, ZERO) + ca * cb
        return Poly(self.ring, {m: c for m, c in out.items() if c})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers need a nonnegative int")
        out, base = self.ring.one(), self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def degree(self, var=None):
        """Total degree (or degree in ``var``); -1 for the zero polynomial."""
        if not self.terms:
            return -1
        if var is None:
            return max(self.terms) >> self.ring.deg_shift
        i = self.ring.index[var]
        return max(self.ring.exponent(m, i) for m in self.terms)

    def leading(self):
        m = max(self.terms)
        return m, self.terms[m]

    def monic(self):
        """(c, p) with p monic in grlex and self = c * p."""
        _, c = self.leading()
        if c == 1:
            return ONE, self
        inv = ONE / c
        return c, Poly(self.ring, {m: v * inv for m, v in self.terms.items()})

    def variables(self):
        seen = set()
        for m in self.terms:
            for i, s in enumerate(self.ring.shifts):
                if (m >> s) & MASK:
                    seen.add(i)
        return [self.ring.names[i] for i in sorted(seen)]

    def diff(self, var):
        ring = self.ring
        i = ring.index.get(var)
        if i is None:
            return ring.zero()
        s = ring.shifts[i]
        step = ring.var_monos[i]
        out = {}
        for m, c in self.terms.items():
            e = (m >> s) & MASK
            if e:
                out[m - step] = c * e
        return Poly(ring, out)

    def to_ring(self, ring):
        """Re-embed into a ring containing all variables actually used."""
        if ring is self.ring:
            return self
        src = self.ring
        idx = []
        for i, v in enumerate(src.names):
            j = ring.index.get(v)
            idx.append(j)
        out = {}
        for m, c in self.terms.items():
            e = [0] * ring.nvars
            for i, s in enumerate(src.shifts):
                k = (m >> s) & MASK
                if k:
                    j = idx[i]
                    if j is None:
                        raise ValueError(f"variable {src.names[i]} not in {ring}")
                    e[j] = k
            out[ring.mono(e)] = c
        return Poly(ring, out)

    def evaluate(self, point, convert=None):
        """Evaluate at ``point`` (name -> value).  Missing variables raise
        KeyError.  ``convert`` maps coefficients into the value domain."""
        ring = self.ring
        used = self.variables()
        powers = {}
        for v in used:
            i = ring.index[v]
            x = point[v]
            top = self.degree(v)
            tbl = [None] * (top + 1)
            acc = x ** 0 if not is_rational(x) else ONE
            for k in range(top + 1):
                tbl[k] = acc
                acc = acc * x
            powers[i] = tbl
        total = None
        items = [(i, ring.shifts[i]) for i in powers]
        for m, c in self.terms.items():
            term = convert(c) if convert else c
            for i, s in items:
                e = (m >> s) & MASK
                if e:
                    term = term * powers[i][e]
            total = term if total is None else total + term
        if total is None:
            return convert(ZERO) if convert else ZERO
        return total

    def compose(self, images, target):
        """Substitute polynomials (in ring ``target``) for every variable used."""
        ring = self.ring
        used = self.variables()
        powers = {}
        for v in used:
            img = images[v]
            if not isinstance(img, Poly):
                img = target.const(img)
            powers[ring.index[v]] = [target.one(), img]
        out = target.zero()
        acc = {}
        for m, c in self.terms.items():
            term = target.const(c)
            for i, tbl in powers.items():
                e = (m >> ring.shifts[i]) & MASK
                if e:
                    while len(tbl) <= e:
                        tbl.append(tbl[-1] * tbl[1])
                    term = term * tbl[e]
            for k, v in term.terms.items():
                w = acc.get(k, ZERO) + v
                if w:
                    acc[k] = w
                else:
                    acc.pop(k, None)
        out = Poly(target, acc)
        return out

    def exact_div(self, other):
        """Quotient self/other if the division is exact, else None."""
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if other.ring is not self.ring:
            other = other.to_ring(self.ring)
        if self.is_zero():
            return self
        ring = self.ring
        lb, cb = other.leading()
        if len(other.terms) == 1:
            out = {}
            inv = ONE / cb
            for m, c in self.terms.items():
                if not ring.divides(lb, m):
                    return None
                out[m - lb] = c * inv
            return Poly(ring, out)
        if self.degree() < other.degree():
            return None
        inv = ONE / cb
        rest = [(m, c) for m, c in other.terms.items() if m != lb]
        r = dict(self.terms)
        heap = [-m for m in r]
        heapq.heapify(heap)
        q = {}
        while heap:
            m = -heapq.heappop(heap)
            c = r.get(m)
            if c is None:
                continue
            if not ring.divides(lb, m):
                return None
            k = m - lb
            qc = c * inv
            q[k] = qc
            del r[m]
            for mo, co in rest:
                t = k + mo
                v = r.get(t)
                if v is None:
                    r[t] = -qc * co
                    heapq.heappush(heap, -t)
                else:
                    v = v - qc * co
                    if v:
                        r[t] = v
                    else:
                        del r[t]
        return Poly(ring, q)

    def sorted_terms(self):
        return sorted(self.terms.items(), reverse=True)


def format_monomial(ring, m):
    parts = []
    for name, s in zip(ring.names, ring.shifts):
        e = (m >> s) & MASK
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p):
    if p.is_zero():
        return "0"
    out = []
    for m, c in p.sorted_terms():
        neg = False
        if isinstance(c, Scalar):
            if c.re == 0 and c.im < 0:
                neg, c = True, -c
        elif c < 0:
            neg, c = True, -c
        mono = format_monomial(p.ring, m)
        if not mono:
            body = format_scalar(c)
        elif c == 1:
            body = mono
        else:
            body = f"{format_scalar(c)}*{mono}"
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)
