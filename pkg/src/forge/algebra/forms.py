"""Rational 1-forms and 2-forms on an affine chart."""
from __future__ import annotations

from itertools import combinations

from ..errors import ChartMismatch
from .poly import PolyRing
from .rational import RationalFn, rf


class Chart:
    """Coordinates carry differentials; params (e.g. symbolic lambdas) do not.

    The ring orders coordinates first, then parameters.
    """

    __slots__ = ("name", "coords", "params", "ring")

    def __init__(self, name, coords, params=()):
        self.name = name
        self.coords = tuple(coords)
        self.params = tuple(params)
        self.ring = PolyRing(self.coords + self.params)

    def __eq__(self, other):
        return isinstance(other, Chart) and self.coords == other.coords and self.ring is other.ring

    def __hash__(self):
        return hash((self.coords, self.ring.names))

    def __repr__(self):
        return f"Chart({self.name}: {', '.join(self.coords)}; params {', '.join(self.params)})"

    def var(self, name):
        return RationalFn(self.ring.gen(name))

    def rf(self, x):
        return rf(self.ring, x)

    def zero_form(self):
        return OneForm(self, {})

    def dvar(self, name):
        return OneForm(self, {name: RationalFn(self.ring.one())})


def _check(a, b):
    if a.chart != b.chart:
        raise ChartMismatch(f"{a.chart!r} vs {b.chart!r}")


class OneForm:
    """sum_v coeffs[v] dv over the chart coordinates."""

    __slots__ = ("chart", "coeffs")

    def __init__(self, chart, coeffs):
        self.chart = chart
        self.coeffs = {v: c for v, c in coeffs.items() if not c.is_zero()}

    def __repr__(self):
        from .text import format_form
        return f"OneForm({format_form(self)})"

    def __getitem__(self, v):
        c = self.coeffs.get(v)
        return c if c is not None else RationalFn(self.chart.ring.zero())

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs.values())

    def __eq__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        _check(self, other)
        out = dict(self.coeffs)
        for v, c in other.coeffs.items():
            out[v] = out[v] + c if v in out else c
        return OneForm(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return OneForm(self.chart, {v: -c for v, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, g):
        """Multiply by a function (RationalFn, Poly or scalar)."""
        if isinstance(g, OneForm):
            raise TypeError("use wedge() for products of forms")
        g = self.chart.rf(g)
        if g.is_zero():
            return OneForm(self.chart, {})
        return OneForm(self.chart, {v: c * g for v, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, g):
        g = self.chart.rf(g)
        inv = g.inverse()
        return OneForm(self.chart, {v: c * inv for v, c in self.coeffs.items()})

    def reduce(self):
        return OneForm(self.chart, {v: c.reduce() for v, c in self.coeffs.items()})

    def evaluate(self, point, convert=None):
        return {v: self[v].evaluate(point, convert) for v in self.chart.coords}

    def pullback(self, subst):
        return subst.pull_form(self)


class TwoForm:
    """sum_{v<w} coeffs[(v, w)] dv^dw, with v<w in chart coordinate order."""

    __slots__ = ("chart", "coeffs")

    def __init__(self, chart, coeffs):
        self.chart = chart
        self.coeffs = {k: c for k, c in coeffs.items() if not c.is_zero()}

    def __repr__(self):
        from .text import format_form
        return f"TwoForm({format_form(self)})"

    def __getitem__(self, key):
        v, w = key
        order = self.chart.coords
        if order.index(v) > order.index(w):
            return -self[(w, v)]
        c = self.coeffs.get((v, w))
        return c if c is not None else RationalFn(self.chart.ring.zero())

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs.values())

    def __eq__(self, other):
        if not isinstance(other, TwoForm):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        _check(self, other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return TwoForm(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return TwoForm(self.chart, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, g):
        g = self.chart.rf(g)
        return TwoForm(self.chart, {k: c * g for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def reduce(self):
        return TwoForm(self.chart, {k: c.reduce() for k, c in self.coeffs.items()})

    def evaluate(self, point, convert=None):
        return {k: self[k].evaluate(point, convert)
                for k in combinations(self.chart.coords, 2)}


def d(obj, chart=None):
    """Exterior derivative: function -> OneForm (needs ``chart``),
    OneForm -> TwoForm."""
    if isinstance(obj, OneForm):
        return exterior_derivative(obj)
    if chart is None:
        raise TypeError("d(function) needs the chart")
    g = chart.rf(obj)
    return OneForm(chart, {v: g.diff(v) for v in chart.coords})


def exterior_derivative(omega):
    if not isinstance(omega, OneForm):
        raise TypeError("exterior_derivative of a function needs d(f, chart)")
    chart = omega.chart
    out = {}
    for v, w in combinations(chart.coords, 2):
        c = omega[w].diff(v) - omega[v].diff(w)
        if not c.is_zero():
            out[(v, w)] = c
    return TwoForm(chart, out)


def wedge(a, b):
    _check(a, b)
    chart = a.chart
    out = {}
    for v, w in combinations(chart.coords, 2):
        av, aw, bv, bw = a.coeffs.get(v), a.coeffs.get(w), b.coeffs.get(v), b.coeffs.get(w)
        c = None
        if av is not None and bw is not None:
            c = av * bw
        if aw is not None and bv is not None:
            t = aw * bv
            c = -t if c is None else c - t
        if c is not None and not c.is_zero():
            out[(v, w)] = c
    return TwoForm(chart, out)


def dlog(g, chart):
    """dg/g."""
    g = chart.rf(g)
    return d(g, chart) / g
