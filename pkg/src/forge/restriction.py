"""Restriction of A_lambda to the lines y = a x + b t, z_i = c_i x + d_i t.

On the line the coordinate is xt = -(a/b) x, so on the chart t = 1

    x = -(b/a) xt,   y = -b (xt - 1),   z_i = d_i - (b c_i / a) xt.

Pole positions are defined as the roots of the restricted conic
f(a, b, xt) and of its shifts f_i = f - z_i^2; the square roots
bt = sqrt(4(a + b - ab)) and dt_i = sqrt(disc_i) fix the labels.
Residues come from exact univariate reduction followed by a Laurent
expansion at each (numerically known) root.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp

from .algebra import Chart, Q, RationalFn, register_factors, scalar
from .algebra.scalar import Scalar, imag_part, real_part
from .connection import Substitution, build_connection, z_names
from .errors import CollidingPoles, HigherOrderPole, NonGeneric, SingularConjugator

DEFAULT_DPS = 30
LINE_VAR = "xt"


def to_mpc(x):
    re, im = real_part(x), imag_part(x)
    re = mp.mpf(re.numerator) / re.denominator
    if im == 0:
        return mp.mpc(re)
    return mp.mpc(re, mp.mpf(im.numerator) / im.denominator)


@dataclass(frozen=True)
class LineParams:
    a: object
    b: object
    c: tuple = ()
    d: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a", scalar(self.a))
        object.__setattr__(self, "b", scalar(self.b))
        object.__setattr__(self, "c", tuple(scalar(v) for v in self.c))
        object.__setattr__(self, "d", tuple(scalar(v) for v in self.d))
        if len(self.c) != len(self.d):
            raise ValueError("c and d must have the same length")

    @property
    def n(self):
        return len(self.c) + 2

    def shifted(self, index, h):
        """Copy with parameter ``index`` (order a, b, c1, d1, c2, d2, ...)
        moved by exact h."""
        vals = self.flat()
        vals[index] = vals[index] + scalar(h)
        return LineParams.from_flat(vals)

    def flat(self):
        out = [self.a, self.b]
        for c, d in zip(self.c, self.d):
            out += [c, d]
        return out

    @classmethod
    def from_flat(cls, vals):
        return cls(vals[0], vals[1], tuple(vals[2::2]), tuple(vals[3::2]))


# ------------------------------------------------------------ exact data

def conic_coeffs(p):
    """(A, B, C) of f(a, b, xt) = A xt^2 + B xt + C."""
    a, b = p.a, p.b
    A = (a - 1) * (a - 1) * b * b / (a * a)
    B = 2 * b * (1 + a + b - a * b) / a
    C = (b - 1) * (b - 1)
    return A, B, C


def shifted_coeffs(p, i):
    """(A_i, B_i, C_i) of f_i = f - (a d_i - b c_i xt)^2 / a^2 (i from 1)."""
    a, b = p.a, p.b
    c, d = p.c[i - 1], p.d[i - 1]
    A = b * b * ((a - 1) * (a - 1) - c * c) / (a * a)
    B = 2 * b * (1 + a + b - a * b + c * d) / a
    C = (b - 1) * (b - 1) - d * d
    return A, B, C


def btilde_sq(p):
    return 4 * (p.a + p.b - p.a * p.b)


def shifted_disc(p, i):
    A, B, C = shifted_coeffs(p, i)
    return B * B - 4 * A * C


def _quad_at(coeffs, x):
    A, B, C = coeffs
    return (A * x + B) * x + C


def check_generic(p):
    a, b = p.a, p.b
    if a == 0 or a == 1:
        raise NonGeneric(f"a must avoid 0 and 1 (a = {a})")
    if b == 0:
        raise NonGeneric("b must be nonzero")
    if b == 1:
        raise NonGeneric("b = 1 makes f(a,b,0) = (b-1)^2 vanish: pole collides with 0")
    if btilde_sq(p) == 0:
        raise NonGeneric("a + b - ab = 0: t1 = t2")
    if btilde_sq(p) == 4 * a:
        raise NonGeneric("bt^2 = 4a")
    f = conic_coeffs(p)
    if _quad_at(f, 1) == 0:
        raise NonGeneric("f(a,b,1) = 0: conic pole collides with 1")
    for i in range(1, p.n - 1):
        c, d = p.c[i - 1], p.d[i - 1]
        if (a - 1) * (a - 1) == c * c:
            raise NonGeneric(f"(a-1)^2 = c_{i}^2: f_{i} drops degree")
        if shifted_disc(p, i) == 0:
            raise NonGeneric(f"discriminant of f_{i} vanishes")
        fi = shifted_coeffs(p, i)
        if fi[2] == 0:
            raise NonGeneric(f"f_{i}(0) = 0: pole collides with 0")
        if _quad_at(fi, 1) == 0:
            raise NonGeneric(f"f_{i}(1) = 0: pole collides with 1")


# ------------------------------------------------------------ etale lift

def principal_sqrt(z):
    """Square root with nonnegative real part (nonnegative imaginary part on
    the imaginary axis)."""
    r = mp.sqrt(z)
    if r.real < 0 or (r.real == 0 and r.imag < 0):
        r = -r
    return r


@dataclass
class TildePoint:
    base: LineParams
    btilde: object
    dtilde: list
    branches: str
    dps: int = DEFAULT_DPS

    @property
    def n(self):
        return self.base.n

    def identity_errors(self):
        """Relative residuals of bt^2 = 4(a+b-ab) and dt_i^2 = disc_i."""
        out = []
        pairs = [(self.btilde, btilde_sq(self.base))]
        pairs += [(dt, shifted_disc(self.base, i)) for i, dt in enumerate(self.dtilde, start=1)]
        for root, exact in pairs:
            e = to_mpc(exact)
            out.append(abs(root * root - e) / max(abs(e), mp.mpf(1)))
        return out


def etale_lift(p, branches=None, dps=DEFAULT_DPS, ref=None):
    """Choose bt and each dt_i.  ``branches`` is a string of '+'/'-' (one per
    root, bt first) relative to the principal root; with ``ref`` the signs are
    chosen closest to the reference TildePoint (continuation)."""
    check_generic(p)
    count = p.n - 1
    with mp.workdps(dps):
        roots = [principal_sqrt(to_mpc(btilde_sq(p)))]
        roots += [principal_sqrt(to_mpc(shifted_disc(p, i))) for i in range(1, p.n - 1)]
        if ref is not None:
            refs = [ref.btilde] + list(ref.dtilde)
            flags = []
            for k, r in enumerate(roots):
                if abs(-r - refs[k]) < abs(r - refs[k]):
                    roots[k] = -r
                    flags.append("-")
                else:
                    flags.append("+")
            branches = "".join(flags)
        else:
            branches = branches or "+" * count
            if len(branches) != count or set(branches) - {"+", "-"}:
                raise ValueError(f"branches must be {count} characters of '+'/'-'")
            roots = [r if s == "+" else -r for r, s in zip(roots, branches)]
    return TildePoint(p, roots[0], roots[1:], branches, dps)


def pole_labels(n):
    return [f"t{k}" for k in range(1, 2 * n - 1)] + ["0", "1"]


def singular_locus(tp):
    """[t1, ..., t_{2n-2}, 0, 1] as mpc, roots of f and f_i in branch order."""
    p = tp.base
    with mp.workdps(tp.dps):
        a, b = to_mpc(p.a), to_mpc(p.b)
        A, B, _ = (to_mpc(v) for v in conic_coeffs(p))
        s = 2 * b / a * tp.btilde
        poles = [(-B + s) / (2 * A), (-B - s) / (2 * A)]
        for i, dt in enumerate(tp.dtilde, start=1):
            Ai, Bi, _ = (to_mpc(v) for v in shifted_coeffs(p, i))
            poles += [(-Bi - dt) / (2 * Ai), (-Bi + dt) / (2 * Ai)]
        poles += [mp.mpc(0), mp.mpc(1)]
        scale = max(mp.mpf(1), max(abs(t) for t in poles))
        for j in range(len(poles)):
            for k in range(j):
                if abs(poles[j] - poles[k]) < mp.mpf(10) ** (-12) * scale:
                    labels = pole_labels(p.n)
                    raise CollidingPoles(f"poles {labels[k]} and {labels[j]} coincide")
    return poles


def printed_pole_formulas(tp):
    """The pole formulas exactly as printed in the source display (kept only
    to measure how far off they are)."""
    p = tp.base
    with mp.workdps(tp.dps):
        a, b = to_mpc(p.a), to_mpc(p.b)
        bt = tp.btilde
        out = [a * (bt - 2) ** 2 / (4 * (a - 1) * (bt ** 2 - a)),
               a * (bt + 2) ** 2 / (4 * (a - 1) * (bt ** 2 - a))]
        for i, dt in enumerate(tp.dtilde, start=1):
            c, d = to_mpc(p.c[i - 1]), to_mpc(p.d[i - 1])
            top = 2 * a * b * (1 + a + b - a * b - c * d)
            den = 2 * b * b * ((a - 1) ** 2 - c * c)
            out += [(top - a * a * dt) / den, (top + a * a * dt) / den]
    return out


def corrected_pole_formulas(tp):
    """Closed forms that do vanish the quadratics: t1, t2 with denominator
    (a-1)(bt^2-4a)."""
    p = tp.base
    with mp.workdps(tp.dps):
        a = to_mpc(p.a)
        bt = tp.btilde
        return [a * (bt - 2) ** 2 / ((a - 1) * (bt ** 2 - 4 * a)),
                a * (bt + 2) ** 2 / ((a - 1) * (bt ** 2 - 4 * a))]


def pole_formula_deviations(tp):
    """One record per printed pole formula: |quadratic(t_printed)| and the
    distance to the root-based pole."""
    poles = singular_locus(tp)
    printed = printed_pole_formulas(tp)
    p = tp.base
    quads = [conic_coeffs(p)] * 2
    for i in range(1, p.n - 1):
        quads += [shifted_coeffs(p, i)] * 2
    labels = pole_labels(p.n)
    out = []
    with mp.workdps(tp.dps):
        for k, (t_pr, t_true, q) in enumerate(zip(printed, poles, quads)):
            qc = [to_mpc(v) for v in q]
            val = abs((qc[0] * t_pr + qc[1]) * t_pr + qc[2])
            out.append({"pole": labels[k], "printed": t_pr, "root": t_true,
                        "quadratic_at_printed": val, "distance": abs(t_pr - t_true)})
    return out


# ------------------------------------------------------------ restriction

@dataclass
class FuchsianSystem:
    poles: list
    labels: list
    residues: list
    residue_at_infinity: object
    sources: dict = field(default_factory=dict)
    exact: object = None
    tp: TildePoint = None
    normalized: bool = False
    higher_order: object = 0

    @property
    def n(self):
        return len(self.poles) // 2

    def residue(self, label):
        if label == "inf":
            return self.residue_at_infinity
        return self.residues[self.labels.index(label)]

    def residue_sum_error(self):
        with mp.workdps(self.tp.dps if self.tp else DEFAULT_DPS):
            tot = self.residue_at_infinity.copy()
            for H in self.residues:
                tot += H
            return mnorm(tot)

    def as_complex(self):
        """(poles, residues) as Python complex numbers / nested lists."""
        import numpy as np
        pts = np.array([complex(t) for t in self.poles])
        res = np.array([[[complex(H[i, j]) for j in range(2)] for i in range(2)]
                        for H in self.residues])
        return pts, res


def mnorm(M):
    return max(abs(M[i, j]) for i in range(M.rows) for j in range(M.cols))


def line_chart():
    chart = Chart("line", (LINE_VAR,))
    register_factors(chart.ring, [chart.ring.gen(LINE_VAR), chart.ring.gen(LINE_VAR) - 1])
    return chart


def line_substitution(p, xy):
    line = line_chart()
    xt = line.var(LINE_VAR)
    a, b = p.a, p.b
    images = {"x": xt * (-b / a), "y": (xt - 1) * (-b)}
    for z, c, d in zip(z_names(p.n), p.c, p.d):
        images[z] = xt * (-b * c / a) + d
    return Substitution(line, xy, images)


def _source_factors(p, sub):
    """Monic images of the polar factors, labelled by their origin."""
    xy = sub.target
    x, y = xy.var("x"), xy.var("y")
    f = x * x + y * y + 1 - 2 * (x * y + x + y)
    named = [("x", x), ("y", y), ("f", f)]
    named += [(f"f-{z}^2", f - xy.var(z) ** 2) for z in z_names(p.n)]
    out = []
    for name, g in named:
        img = sub.pull(g).num
        out.append((name, img.monic()[1]))
    return out


def _uni_coeffs(poly):
    """Dense mpc coefficients, lowest degree first."""
    deg = poly.degree()
    out = [mp.mpc(0)] * (deg + 1)
    for m, c in poly.terms.items():
        out[poly.ring.exponent(m, 0)] = to_mpc(c)
    return out


def _taylor(coeffs, r, order):
    """First ``order`` Taylor coefficients of the polynomial at r."""
    work = list(coeffs)
    out = []
    for _ in range(order):
        if not work:
            out.append(mp.mpc(0))
            continue
        acc = mp.mpc(0)
        quot = [mp.mpc(0)] * (len(work) - 1)
        for k in range(len(work) - 1, -1, -1):
            acc = acc * r + work[k]
            if k:
                quot[k - 1] = acc
        out.append(acc)
        work = quot
    return out


def _series_mul(a, b, order):
    out = [mp.mpc(0)] * order
    for i, x in enumerate(a[:order]):
        for j, y in enumerate(b[: order - i]):
            out[i + j] += x * y
    return out


def _series_div(a, b, order):
    out = []
    for k in range(order):
        acc = a[k] if k < len(a) else mp.mpc(0)
        for j in range(1, k + 1):
            if j < len(b):
                acc -= b[j] * out[k - j]
        out.append(acc / b[0])
    return out


def laurent_principal(rfn, r, factor):
    """Principal part coefficients [c_{-e}, ..., c_{-1}] of the univariate
    ``rfn`` at the simple root r of its denominator factor ``factor``."""
    e = rfn.den[factor]
    order = e
    num = _taylor(_uni_coeffs(rfn.num), r, order)
    qc = _uni_coeffs(factor)
    # factor = (x - r) g(x): Taylor of g at r is Taylor of factor shifted by one
    g = _taylor(qc, r, order + 1)[1:]
    den = [mp.mpc(1)] + [mp.mpc(0)] * (order - 1)
    for _ in range(e):
        den = _series_mul(den, g, order)
    for other, k in rfn.den.items():
        if other == factor:
            continue
        t = _taylor(_uni_coeffs(other), r, order)
        for _ in range(k):
            den = _series_mul(den, t, order)
    h = _series_div(num, den, order)
    return h


def residue_at_infinity_exact(rfn):
    """-lim xt * h(xt) for the coefficient h of d xt; exact."""
    den = rfn.den_poly()
    dn, dd = rfn.num.degree(), den.degree()
    if rfn.num.is_zero() or dn < dd - 1:
        return scalar(0)
    if dn >= dd:
        raise HigherOrderPole("pole of order >= 2 at infinity")
    return -(rfn.num.leading()[1] / den.leading()[1])


def restrict(A, tp, tol=None):
    """Oracle residues of A restricted to the line of ``tp``."""
    p = tp.base
    if A.chart.params:
        raise ValueError("restriction needs numeric lambdas")
    sub = line_substitution(p, A.chart)
    poles = singular_locus(tp)
    labels = pole_labels(p.n)
    src = _source_factors(p, sub)
    groups = {"x": ["0"], "y": ["1"], "f": ["t1", "t2"]}
    for i, z in enumerate(z_names(p.n), start=1):
        groups[f"f-{z}^2"] = [f"t{2 * i + 1}", f"t{2 * i + 2}"]
    with mp.workdps(tp.dps):
        tol = mp.mpf(10) ** (-(tp.dps // 2)) if tol is None else mp.mpf(tol)
        exact = [[sub.pull_form(A[i, j])[LINE_VAR].reduce() for j in range(2)] for i in range(2)]
        res = {lab: mp.matrix(2, 2) for lab in labels}
        inf = mp.matrix(2, 2)
        sources = {}
        worst = mp.mpf(0)
        for i in range(2):
            for j in range(2):
                rfn = exact[i][j]
                for factor in rfn.den:
                    name = next((nm for nm, g in src if g == factor), None)
                    if name is None:
                        raise HigherOrderPole(f"unexpected denominator factor {factor}")
                    for lab in groups[name]:
                        sources[lab] = name
                        r = poles[labels.index(lab)]
                        h = laurent_principal(rfn, r, factor)
                        res[lab][i, j] = h[-1]
                        for c in h[:-1]:
                            worst = max(worst, abs(c))
                inf[i, j] = to_mpc(residue_at_infinity_exact(rfn))
        if worst > tol:
            raise HigherOrderPole(f"double-pole term of size {mp.nstr(worst, 5)} survives")
        for name, labs in groups.items():
            for lab in labs:
                sources.setdefault(lab, name)
        sources["inf"] = "t"
        return FuchsianSystem(poles, labels, [res[lab] for lab in labels], inf,
                              sources, exact, tp, False, worst)


def restrict_line(n, lam, tp, tol=None):
    return restrict(build_connection(n, lam), tp, tol)


# ------------------------------------------------------------ closed forms

def _m2(a, b, x):
    return mp.matrix([[-a * b * (x - 1), -b * x - a], [0, a]])


def _conj(M, X):
    return mp.inverse(M) * X * M


def closed_form_residues(tp, lam):
    """Residue matrices from the closed-form displays, evaluated verbatim at
    the root-based poles.  Keys: pole labels plus "inf"."""
    p = tp.base
    n = p.n
    poles = singular_locus(tp)
    labels = pole_labels(n)
    with mp.workdps(tp.dps):
        L = [to_mpc(scalar(v)) for v in lam]
        a, b = to_mpc(p.a), to_mpc(p.b)
        c = [to_mpc(v) for v in p.c]
        d = [to_mpc(v) for v in p.d]
        bt = tp.btilde
        t1, t2 = poles[0], poles[1]

        def alpha_i(i, x):
            ci, di = c[i - 1], d[i - 1]
            top = a * di - b * ci * x
            return L[i + 1] * (-b * ci / a - top / (2 * a * (x - poles[2 * i]))
                               - top / (2 * a * (x - poles[2 * i + 1])))

        out = {}
        inner0 = mp.matrix([[0, L[1] * (bt ** 2 - 4) / (8 * (a - 1))],
                            [2 * L[1] * (a - 1) / (bt ** 2 - 4), 0]])
        out["0"] = _conj(_m2(a, b, 0), inner0)
        H1 = (1 - L[0]) / 2 * mp.matrix([[1, 2 * (bt ** 2 + 4 * a * a - 8 * a) / (bt ** 2 - 4 * a * a)],
                                         [0, -1]])
        for i in range(1, n - 1):
            k = 1 + (a + b) ** 2 / (b * b * (a - 1) ** 2 * (1 - t1) * (1 - t2))
            H1 += alpha_i(i, mp.mpf(1)) * mp.matrix([[0, k], [0, 0]])
        out["1"] = H1
        for lab, t, other, sign in (("t1", t1, t2, -1), ("t2", t2, t1, 1)):
            low = sign * (L[0] * (a - 1) / (2 * (bt + sign * 2 * a))
                          + L[1] * (a - 1) / (2 * (bt + sign * 2)))
            for i in range(1, n - 1):
                low += a * a * alpha_i(i, t) / (b * b * (a - 1) ** 2 * (t - other))
            inner = mp.matrix([[-mp.mpf(1) / 4, 0], [low, mp.mpf(1) / 4]])
            out[lab] = _conj(_m2(a, b, t), inner)
        for i in range(1, n - 1):
            ci, di = c[i - 1], d[i - 1]
            for lab in (f"t{2 * i + 1}", f"t{2 * i + 2}"):
                t = poles[labels.index(lab)]
                inner = mp.matrix([[0, L[i + 1] * (a * di - b * ci * t) / (2 * a)],
                                   [L[i + 1] * a * (-a * di + b * ci * t)
                                    / (2 * b * b * (a - 1) ** 2 * (t - t1) * (t - t2)), 0]])
                out[lab] = _conj(_m2(a, b, t), inner)
        C = conjugator(p.a)
        e = (L[0] + L[1]) / 2
        out["inf"] = C * mp.matrix([[e, 0], [0, -e]]) * mp.inverse(C)
    return out


# ------------------------------------------------------------ reports

def eigenvalues(H):
    tr = H[0, 0] + H[1, 1]
    det = H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
    disc = mp.sqrt(tr * tr / 4 - det)
    return [tr / 2 + disc, tr / 2 - disc]


def pair_deviation(eigs, value):
    """Distance between an eigenvalue pair and {+value, -value}."""
    e1, e2 = eigs
    return min(max(abs(e1 - value), abs(e2 + value)), max(abs(e1 + value), abs(e2 - value)))


def expected_exponents(lam, n):
    """Half-exponents theta_k/2 per pole label (positive
    representative)."""
    L = [to_mpc(scalar(v)) for v in lam]
    out = {"t1": mp.mpf(1) / 4, "t2": mp.mpf(1) / 4}
    for i in range(1, n - 1):
        out[f"t{2 * i + 1}"] = L[i + 1] / 2
        out[f"t{2 * i + 2}"] = L[i + 1] / 2
    out["0"] = L[1] / 2
    out["1"] = (L[0] - 1) / 2
    out["inf"] = (L[0] + L[1]) / 2
    return out


@dataclass
class PoleReport:
    label: str
    eigenvalues: list
    expected: object
    exponent_deviation: object
    closed_form: object
    matrix_deviation: object


@dataclass
class ResidueReport:
    poles: list

    def max_exponent_deviation(self):
        return max(r.exponent_deviation for r in self.poles)

    def deviations(self, threshold=1e-12):
        """Poles where the closed form disagrees with the oracle."""
        return [r for r in self.poles if r.matrix_deviation > threshold]


def residue_report(fs, lam):
    n = fs.n
    tp = fs.tp
    closed = closed_form_residues(tp, lam)
    out = []
    with mp.workdps(tp.dps):
        expect = expected_exponents(lam, n)
        for lab in fs.labels + ["inf"]:
            H = fs.residue(lab)
            ev = eigenvalues(H)
            out.append(PoleReport(lab, ev, expect[lab], pair_deviation(ev, expect[lab]),
                                  closed[lab], mnorm(closed[lab] - H)))
    return ResidueReport(out)


def conjugator(a):
    if scalar(a) == 1:
        raise SingularConjugator("a = 1 makes [[-1, a-2], [1, a]] singular")
    av = to_mpc(scalar(a))
    return mp.matrix([[-1, av - 2], [1, av]])


def normalize_at_infinity(fs, a=None):
    """Conjugate every residue by C = [[-1, a-2], [1, a]]: H -> C^-1 H C."""
    a = fs.tp.base.a if a is None else a
    with mp.workdps(fs.tp.dps if fs.tp else DEFAULT_DPS):
        C = conjugator(a)
        Ci = mp.inverse(C)
        res = [Ci * H * C for H in fs.residues]
        inf = Ci * fs.residue_at_infinity * C
    return FuchsianSystem(list(fs.poles), list(fs.labels), res, inf, dict(fs.sources),
                          fs.exact, fs.tp, True, fs.higher_order)


# ------------------------------------------------------------ seeded draws

def _draw_rational(rng, lo, hi, max_den=7):
    den = int(rng.integers(1, max_den + 1))
    num = int(rng.integers(int(lo * den), int(hi * den) + 1))
    return Q(num, den)


def pole_clearance(poles):
    """Smallest pairwise distance between the finite poles."""
    return min(abs(poles[j] - poles[k]) for j in range(len(poles)) for k in range(j))


def draw_line(rng, n, min_sep=0.1, max_tries=500, dps=DEFAULT_DPS):
    """Random rational generic line parameters whose poles stay ``min_sep``
    apart (principal branches).  ``rng`` is a numpy Generator."""
    for _ in range(max_tries):
        a = _draw_rational(rng, -4, 4)
        b = _draw_rational(rng, -4, 4)
        c = tuple(_draw_rational(rng, -2, 2) for _ in range(n - 2))
        d = tuple(_draw_rational(rng, -2, 2) for _ in range(n - 2))
        p = LineParams(a, b, c, d)
        try:
            tp = etale_lift(p, dps=dps)
            poles = singular_locus(tp)
        except (NonGeneric, CollidingPoles):
            continue
        with mp.workdps(dps):
            if pole_clearance(poles) >= min_sep and max(abs(t) for t in poles) <= 20:
                return p
    raise NonGeneric(f"no line with pole clearance {min_sep} in {max_tries} draws")


def draw_lambdas(rng, n, max_den=13):
    """Distinct rationals in (0, 1/2); their pairwise sums stay below 1."""
    lam = []
    while len(lam) < n:
        den = int(rng.integers(3, max_den + 1))
        v = Q(int(rng.integers(1, (den - 1) // 2 + 1)), den)
        if 0 < v < Q(1, 2) and v not in lam:
            lam.append(v)
    return lam


def connected_samples(p, count=5, step=Q(1, 50), direction=None, dps=DEFAULT_DPS):
    """``count`` lifted points along a straight segment from ``p``; each lift
    continues the previous one's square-root branches."""
    direction = direction or [Q(1)] + [Q(1, 2)] * (len(p.flat()) - 1)
    out = [etale_lift(p, dps=dps)]
    for k in range(1, count):
        vals = [v + k * step * dv for v, dv in zip(p.flat(), direction)]
        out.append(etale_lift(LineParams.from_flat(vals), dps=dps, ref=out[-1]))
    return out
