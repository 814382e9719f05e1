"""Numerical monodromy of Fuchsian systems and the expected dihedral
representation.

Parallel transport solves dY/ds = -A(z(s)) z'(s) Y with Y(0) = I, matching the
connection convention ds = -A s.  A loop around a simple pole with residue H
therefore transports by a conjugate of exp(-2 pi i H).

Loops are star-shaped from one base point: straight approach, full
counter-clockwise circle, straight return.  The loop around infinity is the
inverse of one big counter-clockwise circle around everything, computed by its
own integration so the product relation is a genuine check.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NoDiagonalizableGenerator, PolesTooClose, StepUnderflow

TWO_PI = 2 * math.pi


# ------------------------------------------------------------ geometry

@dataclass(frozen=True)
class Line:
    z0: complex
    z1: complex

    def point(self, s):
        return self.z0 + s * (self.z1 - self.z0)

    def deriv(self, s):
        return self.z1 - self.z0

    def reversed(self):
        return Line(self.z1, self.z0)


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    theta0: float
    sweep: float

    def point(self, s):
        return self.center + self.radius * cmath.exp(1j * (self.theta0 + s * self.sweep))

    def deriv(self, s):
        return 1j * self.radius * self.sweep * cmath.exp(1j * (self.theta0 + s * self.sweep))

    def reversed(self):
        return Arc(self.center, self.radius, self.theta0 + self.sweep, -self.sweep)


def reverse_path(path):
    return [seg.reversed() for seg in reversed(path)]


def _seg_dist(p, a, b):
    """Distance from point p to segment [a, b]."""
    ab = b - a
    if ab == 0:
        return abs(p - a)
    u = ((p - a) * ab.conjugate()).real / abs(ab) ** 2
    u = min(1.0, max(0.0, u))
    return abs(p - (a + u * ab))


@dataclass
class PathPlan:
    base: complex
    labels: list
    poles: list
    radii: dict
    loops: dict
    order: list
    big: list
    exit_angle: float
    big_radius: float
    clearance: float = 0.0


def _clearance(base, poles):
    """Smallest distance from any pole to another pole's approach segment,
    or from the base to any pole."""
    m = min(abs(t - base) for t in poles)
    for k, tk in enumerate(poles):
        for j, tj in enumerate(poles):
            if j != k:
                m = min(m, _seg_dist(tj, base, tk))
    return m


def choose_base(poles):
    """Real-axis point maximizing clearance; a complex grid is only used when
    every real candidate has a ray passing (almost) through another pole."""
    sep = min(abs(a - b) for i, a in enumerate(poles) for b in poles[:i])
    lo = min(t.real for t in poles) - 1.0
    hi = max(t.real for t in poles) + 1.0
    best, score = None, -1.0
    for k in range(1, 400):
        x = complex(lo + (hi - lo) * k / 400, 0.0)
        c = _clearance(x, poles)
        if c > score:
            best, score = x, c
    if score > 0.05 * sep:
        return best
    span = max(hi - lo, 1.0)
    for i in range(1, 60):
        for j in range(-30, 31):
            z = complex(lo + (hi - lo) * i / 60, span * j / 60)
            c = _clearance(z, poles)
            if c > score:
                best, score = z, c
    return best


def build_paths(poles, labels=None, base=None, min_sep=1e-6):
    poles = [complex(t) for t in poles]
    labels = list(labels) if labels is not None else [str(k) for k in range(len(poles))]
    if len(poles) < 1:
        raise ValueError("need at least one pole")
    if len(poles) > 1:
        sep = min(abs(a - b) for i, a in enumerate(poles) for b in poles[:i])
        if sep < min_sep:
            raise PolesTooClose(f"minimal pole separation {sep:.3g} < {min_sep:g}")
    base = choose_base(poles) if base is None else complex(base)
    radii, loops, angles = {}, {}, {}
    for k, tk in enumerate(poles):
        others = [t for j, t in enumerate(poles) if j != k]
        r = 0.5 * abs(tk - base)
        if others:
            r = min(r, 0.25 * min(abs(tk - t) for t in others))
            r = min(r, 0.5 * min(_seg_dist(tk, base, tj) for tj in others))
        if r <= 0:
            raise PolesTooClose(f"no room for a loop around {labels[k]}")
        u = (tk - base) / abs(tk - base)
        start = tk - r * u
        theta0 = cmath.phase(-u)
        loops[labels[k]] = [Line(base, start), Arc(tk, r, theta0, TWO_PI), Line(start, base)]
        radii[labels[k]] = r
        angles[labels[k]] = cmath.phase(tk - base)
    # exit direction of the big circle: middle of the widest angular gap
    angs = sorted(a % TWO_PI for a in angles.values())
    gaps = [(angs[(i + 1) % len(angs)] - angs[i]) % TWO_PI or TWO_PI for i in range(len(angs))]
    i = max(range(len(gaps)), key=gaps.__getitem__)
    exit_angle = (angs[i] + gaps[i] / 2) % TWO_PI
    order = sorted(labels, key=lambda lab: (angles[lab] - exit_angle) % TWO_PI)
    R = 2 * max(abs(t - base) for t in poles) + 1.0
    far = base + R * cmath.exp(1j * exit_angle)
    big = [Line(base, far), Arc(base, R, exit_angle, TWO_PI), Line(far, base)]
    return PathPlan(base, labels, poles, radii, loops, order, big, exit_angle, R,
                    _clearance(base, poles))


# ------------------------------------------------------------ transport

def _system(fs):
    if hasattr(fs, "as_complex"):
        return fs.as_complex()
    pts, res = fs
    return np.asarray(pts, dtype=complex), np.asarray(res, dtype=complex)


def transport(fs, path, tol=1e-10):
    """Transport matrix along ``path`` (list of segments) for the system
    d + sum H_k dz/(z - t_k); ``fs`` is a FuchsianSystem or (poles, residues)."""
    pts, res = _system(fs)
    Y = np.eye(2, dtype=complex)
    for seg in path:
        def rhs(s, y, seg=seg):
            z = seg.point(s)
            A = np.tensordot(1.0 / (z - pts), res, axes=1)
            return (-(A @ y.reshape(2, 2)) * seg.deriv(s)).ravel()
        sol = solve_ivp(rhs, (0.0, 1.0), Y.ravel(), method="DOP853",
                        rtol=tol, atol=tol * 1e-2)
        if not sol.success:
            raise StepUnderflow(f"integrator failed: {sol.message}")
        Y = sol.y[:, -1].reshape(2, 2)
    return Y


@dataclass
class MonodromyRep:
    matrices: dict
    order: list
    base: complex
    tol: float
    plan: PathPlan
    product_identity_error: float
    det_errors: dict = field(default_factory=dict)

    def trace(self, label):
        return complex(np.trace(self.matrices[label]))

    def traces(self):
        return {lab: self.trace(lab) for lab in self.matrices}


def monodromy_rep(fs, plan=None, tol=1e-10):
    if plan is None:
        pts, _ = _system(fs)
        labels = getattr(fs, "labels", None)
        plan = build_paths(pts, labels)
    mats = {lab: transport(fs, plan.loops[lab], tol) for lab in plan.labels}
    big = transport(fs, plan.big, tol)
    mats["inf"] = np.linalg.inv(big)
    prod = np.eye(2, dtype=complex)
    for lab in plan.order:
        prod = mats[lab] @ prod
    err = float(np.max(np.abs(prod @ mats["inf"] - np.eye(2))))
    dets = {lab: float(abs(np.linalg.det(M) - 1)) for lab, M in mats.items()}
    return MonodromyRep(mats, list(plan.order) + ["inf"], plan.base, tol, plan, err, dets)


# ------------------------------------------------------------ expected

def a_values(lam):
    return [cmath.exp(-1j * math.pi * float(v)) for v in lam]


def expected_rep(lam, n):
    """Closed-form dihedral generators, keyed by pole label."""
    a = a_values(lam)
    diag = lambda u: np.array([[u, 0], [0, 1 / u]], dtype=complex)
    out = {
        "0": diag(a[1]),
        "1": diag(-a[0]),
        "t1": np.array([[0, 1], [-1, 0]], dtype=complex),
        "t2": np.array([[0, a[0] ** 2], [-a[0] ** -2, 0]], dtype=complex),
        "inf": diag(a[0] / a[1]),
    }
    for i in range(1, n - 1):
        out[f"t{2 * i + 1}"] = diag(a[i + 1])
        out[f"t{2 * i + 2}"] = diag(1 / a[i + 1])
    return out


def expected_traces(lam, n):
    return {lab: complex(np.trace(M)) for lab, M in expected_rep(lam, n).items()}


def generator_rep(lam, n, entries=None):
    """Generators alpha_0, gamma_0, alpha_{y0+}, alpha_{yi+} in the closed-form
    dihedral shape (a_j = exp(-pi i lambda_j)).  ``entries`` may supply
    exact a_j values (anything with *, /, -) instead."""
    a = entries if entries is not None else a_values(lam)
    one = a[0] / a[0]
    zero = a[0] - a[0]
    diag = lambda u: [[u, zero], [zero, one / u]]
    return {
        "alpha0": [[-a[0], zero], [zero, -(one / a[0])]],
        "gamma0": diag(a[1]),
        "alpha_y0": [[zero, one], [-one, zero]],
        "alpha_y": [diag(a[i + 1]) for i in range(1, n - 1)],
    }


def _mul(A, B):
    return [[A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2)] for i in range(2)]


def _inv(A):
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    return [[A[1][1] / det, -A[0][1] / det], [-A[1][0] / det, A[0][0] / det]]


def _comm(A, B):
    return _mul(_mul(A, B), _mul(_inv(A), _inv(B)))


def _sub(A, B):
    return [[A[i][j] - B[i][j] for j in range(2)] for i in range(2)]


def relation_differences(rep):
    """Left minus right for each relation, as 2x2 nested lists:
    [alpha0, gamma0] = 1, [alpha~, gamma0] = 1,
    ((gamma0 alpha~) alpha_y0)^2 = (alpha_y0 (gamma0 alpha~))^2,
    (alpha_y0 alpha0)^2 = (alpha0 alpha_y0)^2."""
    a0, g0, y0 = rep["alpha0"], rep["gamma0"], rep["alpha_y0"]
    one = _mul(g0, _inv(g0))
    at = one
    for m in rep["alpha_y"]:
        at = _mul(at, m)
    sq = lambda M: _mul(M, M)
    ga = _mul(g0, at)
    return {
        "commutator_alpha0_gamma0": _sub(_comm(a0, g0), one),
        "commutator_alphatilde_gamma0": _sub(_comm(at, g0), one),
        "braid_gamma0_alphatilde": _sub(sq(_mul(ga, y0)), sq(_mul(y0, ga))),
        "braid_alpha0": _sub(sq(_mul(y0, a0)), sq(_mul(a0, y0))),
    }


def check_relations(rep, tol=1e-12):
    """Numeric check; returns (ok, {relation: max abs deviation})."""
    diffs = relation_differences(rep)
    errs = {k: max(abs(complex(v)) for row in D for v in row) for k, D in diffs.items()}
    return all(e <= tol for e in errs.values()), errs


def check_relations_exact(n):
    """Exact check with a_j = (1 + i s_j)/(1 - i s_j) on the unit circle,
    s_j independent symbols.  Returns {relation: True if identically zero}."""
    from .algebra import I, PolyRing, RationalFn, register_factors
    ring = PolyRing(tuple(f"s{j}" for j in range(n)))
    gens = ring.gens()
    register_factors(ring, [1 + I * s for s in gens] + [1 - I * s for s in gens])
    a = [RationalFn.from_factored(ring.one() + s * I, [(ring.one() - s * I, 1)]) for s in gens]
    rep = generator_rep(None, n, entries=a)
    diffs = relation_differences(rep)
    return {k: all(v.is_zero() for row in D for v in row) for k, D in diffs.items()}


# ------------------------------------------------------------ dihedral

@dataclass
class DihedralReport:
    ok: bool
    generator: str
    conjugator: object
    classes: dict
    residuals: dict


def _classify(M, tol):
    scale = max(1.0, float(np.max(np.abs(M))))
    off = max(abs(M[0, 1]), abs(M[1, 0])) / scale
    on = max(abs(M[0, 0]), abs(M[1, 1])) / scale
    if off <= tol:
        return "diagonal", off
    if on <= tol:
        return "antidiagonal", on
    return "neither", min(off, on)


def dihedral_check(mats, tol=1e-6):
    """Conjugate everything into the eigenbasis of one generator with distinct
    eigenvalues and classify each matrix as diagonal/antidiagonal."""
    if isinstance(mats, MonodromyRep):
        mats = mats.matrices
    cands = []
    for lab, M in mats.items():
        ev = np.linalg.eigvals(M)
        gap = abs(ev[0] - ev[1])
        if gap > 1e-4:
            cands.append((gap, lab))
    if not cands:
        raise NoDiagonalizableGenerator("every generator has a repeated eigenvalue")
    best = None
    for gap, lab in sorted(cands, reverse=True):
        _, P = np.linalg.eig(mats[lab])
        P = P / np.linalg.norm(P, axis=0)
        Pi = np.linalg.inv(P)
        classes, resid = {}, {}
        for k, M in mats.items():
            c, r = _classify(Pi @ M @ P, tol)
            classes[k], resid[k] = c, r
        ok = all(c != "neither" for c in classes.values())
        report = DihedralReport(ok, lab, P, classes, resid)
        if ok:
            return report
        if best is None:
            best = report
    return best


# ------------------------------------------------------------ isomonodromy

def two_letter_words(labels):
    return [(labels[i], labels[j]) for i in range(len(labels)) for j in range(i + 1, len(labels))]


@dataclass
class TraceTable:
    labels: list
    words: list
    rows: list
    max_variation: float
    orders: list

    @property
    def order_stable(self):
        """Same cyclic order of loops in every sample (the exit gap of the
        big circle may rotate it)."""
        return all(_same_cycle(o, self.orders[0]) for o in self.orders)


def _same_cycle(a, b):
    if len(a) != len(b):
        return False
    return any(list(a[k:]) + list(a[:k]) == list(b) for k in range(len(a)))


def word_traces(rep, words):
    out = {}
    for w in words:
        M = np.eye(2, dtype=complex)
        for lab in w:
            M = M @ rep.matrices[lab]
        out["*".join(w)] = complex(np.trace(M))
    return out


def isomonodromy_scan(systems, words=None, tol=1e-10, base=None):
    """Traces of generators and words for each FuchsianSystem in ``systems``
    (connected samples), with one base point shared by all samples."""
    rows, orders = [], []
    labels = None
    for fs in systems:
        pts, _ = _system(fs)
        if base is None:
            base = choose_base(list(pts))
        plan = build_paths(pts, fs.labels, base=base)
        rep = monodromy_rep(fs, plan, tol)
        if labels is None:
            labels = list(rep.matrices)
            words = words if words is not None else two_letter_words(labels)
        row = {lab: rep.trace(lab) for lab in labels}
        row.update(word_traces(rep, words))
        rows.append(row)
        orders.append(list(plan.order))
    keys = list(rows[0]) if rows else []
    var = 0.0
    for k in keys:
        vals = [r[k] for r in rows]
        var = max(var, max(abs(v - vals[0]) for v in vals))
    return TraceTable(labels or [], words or [], rows, var, orders)


# ------------------------------------------------------------ comparisons

def lambda_genericity(lam, tol=1e-9):
    """Names of the violated genericity conditions (empty when generic):
    a_j != 1/a_j, a_j^2 != a_k^(+-2) for j != k, a0 a1 != +-1."""
    a = a_values(lam)
    bad = []
    for j, u in enumerate(a):
        if abs(u - 1 / u) < tol:
            bad.append(f"a{j} = 1/a{j}")
    for j in range(len(a)):
        for k in range(j + 1, len(a)):
            if min(abs(a[j] ** 2 - a[k] ** 2), abs(a[j] ** 2 - a[k] ** -2)) < tol:
                bad.append(f"a{j}^2 = a{k}^(+-2)")
    if min(abs(a[0] * a[1] - 1), abs(a[0] * a[1] + 1)) < tol:
        bad.append("a0 a1 = +-1")
    return bad


def local_trace(exponent):
    """Trace of a loop around a simple pole with eigenvalues +-exponent."""
    return 2 * math.cos(TWO_PI * float(exponent))


def match_multiset(computed, expected):
    """Optimal one-to-one pairing of two equal-size lists of complex numbers.
    Returns [(computed_key, expected_key, |difference|)] for dicts."""
    from scipy.optimize import linear_sum_assignment
    ck, ek = list(computed), list(expected)
    if len(ck) != len(ek):
        raise ValueError("multisets of different sizes")
    cost = np.array([[abs(computed[c] - expected[e]) for e in ek] for c in ck])
    rows, cols = linear_sum_assignment(cost)
    return [(ck[r], ek[c], float(cost[r, c])) for r, c in zip(rows, cols)]
