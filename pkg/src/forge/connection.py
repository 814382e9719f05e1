"""The flat sl2 connection A_lambda, its gauge/twist/pull-back images and the
split form on the double cover.

Conventions: horizontal sections satisfy ds = -A s, and the projective
coordinate is w = s0/s1, so the Riccati equation of A reads
dw + c2 w^2 + 2 c1 w + c0 = 0 with c2 = -A[1][0], c1 = (A[0][0]-A[1][1])/2,
c0 = A[0][1].
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import (Chart, OneForm, Q, RationalFn, d, dlog, exterior_derivative,
                      register_factors, scalar, wedge)
from .errors import SingularGauge, SingularMobius

HALF = Q(1, 2)


# ---------------------------------------------------------------- charts

def lambda_names(n):
    return tuple(f"l{j}" for j in range(n))


def z_names(n):
    return tuple(f"z{i}" for i in range(1, n - 1))


def _is_symbolic(lam):
    return lam is None or (isinstance(lam, str) and lam == "sym")


def _chart(name, coords, n, lam):
    params = lambda_names(n) if _is_symbolic(lam) else ()
    return Chart(name, coords, params)


def _lambda_fns(chart, n, lam):
    if _is_symbolic(lam):
        return [chart.var(v) for v in lambda_names(n)]
    if len(lam) != n:
        raise ValueError(f"need {n} lambda values, got {len(lam)}")
    return [chart.rf(scalar(v)) for v in lam]


def xy_chart(n, lam=None):
    """Affine chart t = 1 with coordinates x, y, z1..z_{n-2}."""
    chart = _chart("xy", ("x", "y") + z_names(n), n, lam)
    f = conic(chart)
    register_factors(chart.ring, [chart.ring.gen("x"), chart.ring.gen("y"), f.num]
                     + [(f - chart.var(z) ** 2).num for z in z_names(n)])
    return chart


def conic(chart, a="x", b="y"):
    """f(x, y, 1) = x^2 + y^2 + 1 - 2(xy + x + y)."""
    x, y = chart.var(a), chart.var(b)
    return x * x + y * y + 1 - 2 * (x * y + x + y)


def u_chart(n, lam=None):
    """Double cover chart (u0, u1, z_i)."""
    chart = _chart("u", ("u0", "u1") + z_names(n), n, lam)
    u0, u1 = chart.var("u0"), chart.var("u1")
    facs = [u0, u1, u0 - 1, u1 - 1, u0 - u1]
    for z in z_names(n):
        facs += [u0 - u1 + chart.var(z), u0 - u1 - chart.var(z)]
    register_factors(chart.ring, [g.num for g in facs])
    return chart


def s_chart(n, lam=None):
    """Symmetric-function chart (s1, s2, z_i), s1 = u0 + u1, s2 = u0 u1."""
    chart = _chart("s", ("s1", "s2") + z_names(n), n, lam)
    s1, s2 = chart.var("s1"), chart.var("s2")
    disc = s1 * s1 - 4 * s2
    facs = [s2, 1 - s1 + s2, disc] + [disc - chart.var(z) ** 2 for z in z_names(n)]
    register_factors(chart.ring, [g.num for g in facs])
    return chart


# ---------------------------------------------------------------- alphas

@dataclass
class AlphaSet:
    chart: Chart
    lam: list
    a0: OneForm
    a1: OneForm
    a2: OneForm
    a0i: list = field(default_factory=list)
    a2i: list = field(default_factory=list)
    f: RationalFn = None


def build_alpha(n, lam=None):
    """The five form families on the chart t = 1.  ``lam`` is a list of n
    exact scalars, or None / "sym" for symbolic lambdas l0..l_{n-1}."""
    if n < 2:
        raise ValueError("n must be at least 2")
    chart = xy_chart(n, lam)
    L = _lambda_fns(chart, n, lam)
    x, y = chart.var("x"), chart.var("y")
    dx, dy = chart.dvar("x"), chart.dvar("y")
    f = conic(chart)
    l0, l1 = L[0], L[1]
    a0 = (-HALF) * (dx * (2 * l0 + l1) - dy * (2 * l1 + l0)) \
        - dx * (l1 * (y - 1) * HALF / x) + dy * (l0 * (x - 1) * HALF / y)
    a1 = d(f, chart) * (-Q(1, 4)) / f
    a2 = a0 * (-1 / f)
    a0i, a2i = [], []
    for i, z in enumerate(z_names(n), start=1):
        zi = chart.var(z)
        g = f - zi * zi
        form = (chart.dvar(z) - d(g, chart) * (zi * HALF / g)) * L[i + 1]
        a0i.append(form)
        a2i.append(form * (-1 / f))
    return AlphaSet(chart, L, a0, a1, a2, a0i, a2i, f)


def build_alpha_s(n, lam=None):
    """The same forms written in the (s1, s2) chart; used only as an
    independent cross-check of the (x, y) formulas."""
    chart = s_chart(n, lam)
    L = _lambda_fns(chart, n, lam)
    s1, s2 = chart.var("s1"), chart.var("s2")
    ds1, ds2 = chart.dvar("s1"), chart.dvar("s2")
    l0, l1 = L[0], L[1]
    w = 1 - s1 + s2
    disc = s1 * s1 - 4 * s2
    a0 = ds1 * ((2 * l0 * w + l1 * (2 * s2 - s1)) / (2 * w)) \
        - ds2 * ((l0 * s1 * w + l1 * s2 * (s1 - 2)) / (2 * s2 * w))
    a1 = d(disc, chart) * (-Q(1, 4)) / disc
    a2 = a0 * (-1 / disc)
    a0i, a2i = [], []
    for i, z in enumerate(z_names(n), start=1):
        zi = chart.var(z)
        g = disc - zi * zi
        form = (chart.dvar(z) - d(g, chart) * (zi * HALF / g)) * L[i + 1]
        a0i.append(form)
        a2i.append(form * (-1 / disc))
    return AlphaSet(chart, L, a0, a1, a2, a0i, a2i, disc)


# ---------------------------------------------------------------- matrices

class ConnMatrix:
    """2x2 matrix of OneForms on one chart."""

    def __init__(self, chart, entries):
        self.chart = chart
        self.entries = [list(row) for row in entries]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def trace(self):
        return self.entries[0][0] + self.entries[1][1]

    def is_zero(self):
        return all(e.is_zero() for row in self.entries for e in row)

    def __eq__(self, other):
        if not isinstance(other, ConnMatrix):
            return NotImplemented
        return all((self[i, j] - other[i, j]).is_zero() for i in range(2) for j in range(2))

    __hash__ = None

    def __sub__(self, other):
        return ConnMatrix(self.chart, [[self[i, j] - other[i, j] for j in range(2)] for i in range(2)])

    def __add__(self, other):
        return ConnMatrix(self.chart, [[self[i, j] + other[i, j] for j in range(2)] for i in range(2)])

    def reduce(self):
        return ConnMatrix(self.chart, [[e.reduce() for e in row] for row in self.entries])

    def evaluate(self, point, convert=None):
        """{coord: 2x2 nested list} of coefficient values at a point."""
        return {v: [[self[i, j][v].evaluate(point, convert) for j in range(2)] for i in range(2)]
                for v in self.chart.coords}

    @classmethod
    def zero(cls, chart):
        z = chart.zero_form()
        return cls(chart, [[z, z], [z, z]])

    @classmethod
    def diag(cls, chart, a, b):
        z = chart.zero_form()
        return cls(chart, [[a, z], [z, b]])


class GaugeMatrix:
    """2x2 matrix of RationalFns."""

    def __init__(self, chart, entries):
        self.chart = chart
        self.entries = [[chart.rf(e) for e in row] for row in entries]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def det(self):
        return self[0, 0] * self[1, 1] - self[0, 1] * self[1, 0]

    def inverse(self):
        det = self.det()
        if det.is_zero():
            raise SingularGauge("gauge matrix has identically zero determinant")
        inv = det.inverse()
        a, b, c, dd = self[0, 0], self[0, 1], self[1, 0], self[1, 1]
        return GaugeMatrix(self.chart, [[(dd * inv).reduce(), (-b * inv).reduce()],
                                        [(-c * inv).reduce(), (a * inv).reduce()]])

    def __matmul__(self, other):
        return GaugeMatrix(self.chart, [[self[i, 0] * other[0, j] + self[i, 1] * other[1, j]
                                         for j in range(2)] for i in range(2)])

    @classmethod
    def identity(cls, chart):
        return cls(chart, [[1, 0], [0, 1]])


def _form_mat_mul_left(M, A):
    """M (functions) times A (forms)."""
    return [[A[0][j] * M[i, 0] + A[1][j] * M[i, 1] for j in range(2)] for i in range(2)]


def _form_mat_mul_right(A, M):
    return [[A[i][0] * M[0, j] + A[i][1] * M[1, j] for j in range(2)] for i in range(2)]


def build_connection(n, lam=None, alphas=None):
    """A_lambda on the chart t = 1."""
    al = alphas or build_alpha(n, lam)
    chart = al.chart
    x, y = chart.var("x"), chart.var("y")
    dx, dy = chart.dvar("x"), chart.dvar("y")
    xm = x - 1
    a11 = al.a2 * xm + al.a1 + dy * (HALF / y)
    a12 = (dx + al.a2 * (xm * xm) + al.a1 * (2 * xm) + al.a0) / y
    a21 = al.a2 * y
    for a0i, a2i in zip(al.a0i, al.a2i):
        a11 = a11 + a2i * xm
        a12 = a12 + (a2i * (xm * xm) + a0i) / y
        a21 = a21 + a2i * y
    a11, a12, a21 = a11.reduce(), a12.reduce(), a21.reduce()
    return ConnMatrix(chart, [[a11, a12], [-a21, -a11]])


def curvature(A):
    """dA + A^A, entrywise 2-forms."""
    out = []
    for i in range(2):
        row = []
        for j in range(2):
            F = exterior_derivative(A[i, j]) + wedge(A[i, 0], A[0, j]) + wedge(A[i, 1], A[1, j])
            row.append(F)
        out.append(row)
    return out


def curvature_is_zero(F):
    return all(F[i][j].is_zero() for i in range(2) for j in range(2))


def gauge(A, M):
    """M^{-1} dM + M^{-1} A M."""
    if M.chart != A.chart:
        M = GaugeMatrix(A.chart, M.entries)
    Mi = M.inverse()
    chart = A.chart
    dM = [[d(M[i, j], chart) for j in range(2)] for i in range(2)]
    left = _form_mat_mul_left(Mi, dM)
    AM = _form_mat_mul_right(A.entries, M)
    right = _form_mat_mul_left(Mi, AM)
    return ConnMatrix(chart, [[(left[i][j] + right[i][j]).reduce() for j in range(2)]
                              for i in range(2)])


def twist(A, eta):
    """A + eta * Id."""
    return ConnMatrix(A.chart, [[A[0, 0] + eta, A[0, 1]], [A[1, 0], A[1, 1] + eta]])


class Substitution:
    """Pull-back along a map source -> target given by target-coordinate
    images over the source ring.  Parameters shared by both rings map to
    themselves."""

    def __init__(self, source, target, images):
        self.source = source
        self.target = target
        self.images = {v: source.rf(im) for v, im in images.items()}
        self._dimg = {}

    def pull(self, r):
        return r.substitute(self.images, self.source.ring)

    def _d_image(self, v):
        if v not in self._dimg:
            if v in self.images:
                self._dimg[v] = d(self.images[v], self.source)
            else:
                self._dimg[v] = self.source.dvar(v)
        return self._dimg[v]

    def pull_form(self, omega):
        out = self.source.zero_form()
        for v, c in omega.coeffs.items():
            out = out + self._d_image(v) * self.pull(c)
        return out.reduce()

    def after(self, inner):
        """The composite map: ``inner`` (source -> self.source) followed by self."""
        images = {v: inner.pull(im) for v, im in self.images.items()}
        return Substitution(inner.source, self.target, images)


def pullback(A, s):
    return ConnMatrix(s.source, [[s.pull_form(A[i, j]) for j in range(2)] for i in range(2)])


# ---------------------------------------------------------------- Riccati

@dataclass
class RiccatiForm:
    """dw + c2 w^2 + 2 c1 w + c0."""
    c2: OneForm
    c1: OneForm
    c0: OneForm

    def __eq__(self, other):
        return self.c2 == other.c2 and self.c1 == other.c1 and self.c0 == other.c0


def riccati(A):
    return RiccatiForm(c2=(-A[1, 0]).reduce(),
                       c1=((A[0, 0] - A[1, 1]) * HALF).reduce(),
                       c0=A[0, 1].reduce())


def mobius_transform(R, m):
    """Riccati form in w' where w = (p w' + q)/(r w' + s), m = [[p, q], [r, s]].

    Derived directly by substituting the Mobius map; independent of gauge().
    """
    chart = R.c2.chart
    p, q, r, s = (chart.rf(m[i][j]) if not isinstance(m, GaugeMatrix) else m[i, j]
                  for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    delta = p * s - q * r
    if delta.is_zero():
        raise SingularMobius("Mobius map has zero determinant")
    dp, dq, dr, ds = (d(g, chart) for g in (p, q, r, s))
    inv = delta.inverse()
    c2 = (dp * r - dr * p + R.c2 * (p * p) + R.c1 * (2 * p * r) + R.c0 * (r * r)) * inv
    c1 = (dp * s + dq * r - dr * q - ds * p + R.c2 * (2 * p * q)
          + R.c1 * (2 * (p * s + q * r)) + R.c0 * (2 * r * s)) * (inv * HALF)
    c0 = (dq * s - ds * q + R.c2 * (q * q) + R.c1 * (2 * q * s) + R.c0 * (s * s)) * inv
    return RiccatiForm(c2.reduce(), c1.reduce(), c0.reduce())


def pull_riccati(R, s):
    return RiccatiForm(s.pull_form(R.c2), s.pull_form(R.c1), s.pull_form(R.c0))


# ---------------------------------------------------------------- split form

def split_forms(n, lam=None, chart=None):
    """omega0 and psi_n on the double-cover chart."""
    chart = chart or u_chart(n, lam)
    L = _lambda_fns(chart, n, lam)
    u0, u1 = chart.var("u0"), chart.var("u1")
    omega0 = (dlog(u0, chart) - dlog(u1, chart)) * L[0] \
        + (dlog(u0 - 1, chart) - dlog(u1 - 1, chart)) * L[1]
    psi = chart.zero_form()
    for i, z in enumerate(z_names(n), start=1):
        zi = chart.var(z)
        psi = psi + (dlog(u0 - u1 + zi, chart) - dlog(u0 - u1 - zi, chart)) * L[i + 1]
    return omega0.reduce(), psi.reduce()


def cover_map(n, lam=None):
    """(u0, u1, z) -> (x, y, z) with x = (1-u0)(1-u1), y = u0 u1."""
    src, tgt = u_chart(n, lam), xy_chart(n, lam)
    u0, u1 = src.var("u0"), src.var("u1")
    return Substitution(src, tgt, {"x": (1 - u0) * (1 - u1), "y": u0 * u1})


def s_to_xy(n, lam=None):
    """(s1, s2, z) -> (x, y, z) with x = 1 - s1 + s2, y = s2."""
    src, tgt = s_chart(n, lam), xy_chart(n, lam)
    s1, s2 = src.var("s1"), src.var("s2")
    return Substitution(src, tgt, {"x": 1 - s1 + s2, "y": s2})


def u_to_s(n, lam=None):
    src, tgt = u_chart(n, lam), s_chart(n, lam)
    u0, u1 = src.var("u0"), src.var("u1")
    return Substitution(src, tgt, {"s1": u0 + u1, "s2": u0 * u1})


def gauge_m2(chart):
    return GaugeMatrix(chart, [[chart.var("y"), chart.var("x") - 1], [0, 1]])


def gauge_m1(chart):
    u = chart.var("u0") - chart.var("u1")
    return GaugeMatrix(chart, [[-1, -u], [-1, u]])


@dataclass
class SplitReport:
    n: int
    result: ConnMatrix
    expected: ConnMatrix
    residual: ConnMatrix
    off_diagonal_zero: bool
    diagonal_match: bool

    @property
    def ok(self):
        return self.off_diagonal_zero and self.diagonal_match


def verify_split(n, lam=None):
    """Run A_lambda down to the split connection on the double cover and
    compare with diag((omega0+psi)/2, -(omega0+psi)/2) exactly."""
    A = build_connection(n, lam)
    xy = A.chart
    B = twist(A, d(xy.var("y"), xy) * (HALF / xy.var("y")))
    B = gauge(B, gauge_m2(xy).inverse())
    cov = cover_map(n, lam)
    C = pullback(B, cov)
    uc = cov.source
    du = d(uc.var("u0") - uc.var("u1"), uc)
    C = twist(C, du * (HALF / (uc.var("u0") - uc.var("u1"))))
    D = gauge(C, gauge_m1(uc).inverse())
    omega0, psi = split_forms(n, lam, uc)
    half = (omega0 + psi) * HALF
    E = ConnMatrix.diag(uc, half, -half)
    R = D - E
    off = R[0, 1].is_zero() and R[1, 0].is_zero()
    diag = R[0, 0].is_zero() and R[1, 1].is_zero()
    return SplitReport(n, D, E, R, off, diag)
