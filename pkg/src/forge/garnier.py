"""Garnier Hamiltonians and the algebraic solution carried by the line family.

Times are the finite poles t_1..t_{2n-2} of the restricted system (0 and 1
are fixed as t_{2n-1}, t_{2n}).  Spectral coordinates are the zeros nu_j of
the (1,2)-entry of the normalized system and their momenta rho_j.

Sign convention: the restricted system is ds/dxt = -sum H_k/(xt - t_k) s, so
in the usual Schlesinger normalization ds/dxt = sum A_k/(xt - t_k) s the
residues are A_k = -H_k.  With that identification the momenta are

    rho_j = sum_k (theta_k/2 - (H_k)_11) / (nu_j - t_k)

and kappa = ((sum theta - 1)^2 - (theta_inf + 1)^2) / 4.  The alternative
``convention="printed"`` uses (H_k)_11 + theta_k/2 and is kept for the
deviation report.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np

from .algebra import Q, scalar
from .connection import build_connection
from .errors import DegreeDrop, LabelSwap, PoleCollision, SingularJacobian
from .restriction import (etale_lift, normalize_at_infinity, restrict, singular_locus,
                          to_mpc)

GARNIER_DPS = 40
CONVENTIONS = ("corrected", "printed")


@dataclass(frozen=True)
class ThetaData:
    theta: tuple
    theta_inf: object
    kappa: object
    kappa_printed: object

    def numeric(self):
        return [to_mpc(v) for v in self.theta], to_mpc(self.kappa)


def theta_params(lam, n):
    """Exact theta_1..theta_{2n}, theta_inf and both kappa variants."""
    if n < 2:
        raise ValueError("n must be at least 2")
    lam = [scalar(v) for v in lam]
    if len(lam) != n:
        raise ValueError(f"need {n} lambdas, got {len(lam)}")
    half = Q(1, 2)
    theta = [half, half]
    for i in range(1, n - 1):
        theta += [lam[i + 1], lam[i + 1]]
    theta += [lam[1], lam[0] - 1]
    theta_inf = lam[0] + lam[1]
    s = sum(theta[1:], theta[0]) - 1
    kappa = (s * s - (theta_inf + 1) * (theta_inf + 1)) / 4
    kappa_printed = (s * s - (theta_inf * theta_inf + 1)) / 4
    return ThetaData(tuple(theta), theta_inf, kappa, kappa_printed)


def _num(x):
    if isinstance(x, (mp.mpf, mp.mpc)):
        return x
    if isinstance(x, (int, float, complex)):
        return mp.mpmathify(x)
    return to_mpc(scalar(x))


def _nonzero(value, what, eps):
    if abs(value) <= eps:
        raise PoleCollision(f"{what} vanishes")
    return value


def hamiltonian(i, t, nu, rho, th, kappa=None, eps=None):
    """K_i (``i`` counts from 0) at times ``t`` (length 2n-2) and spectral
    coordinates (nu, rho).  ``th`` is a ThetaData or a plain list of the 2n
    theta values; ``kappa`` overrides the one in ``th``."""
    if isinstance(th, ThetaData):
        theta, kap = th.numeric()
    else:
        theta, kap = [_num(v) for v in th], None
    if kappa is not None:
        kap = _num(kappa)
    if kap is None:
        raise ValueError("kappa is required with a plain theta list")
    t = [_num(v) for v in t]
    nu = [_num(v) for v in nu]
    rho = [_num(v) for v in rho]
    eps = mp.mpf(10) ** (-(mp.mp.dps - 5)) if eps is None else eps
    tt = t + [mp.mpf(0), mp.mpf(1)]
    ti = tt[i]
    lam_ti = mp.fprod(ti - v for v in nu)
    t_prime = mp.fprod(ti - tt[m] for m in range(len(tt)) if m != i)
    _nonzero(t_prime, f"T'(t_{i + 1})", eps)
    total = 0
    for k, v in enumerate(nu):
        lam_prime = mp.fprod(v - w for l, w in enumerate(nu) if l != k)
        _nonzero(lam_prime, f"Lambda'(nu_{k + 1})", eps)
        _nonzero(v - ti, f"nu_{k + 1} - t_{i + 1}", eps)
        _nonzero(v * (v - 1), f"nu_{k + 1}(nu_{k + 1} - 1)", eps)
        drift = 0
        for m, tm in enumerate(tt):
            gap = _nonzero(v - tm, f"nu_{k + 1} - t_{m + 1}", eps)
            drift += (theta[m] - (1 if m == i else 0)) / gap
        bracket = rho[k] ** 2 - drift * rho[k] + kap / (v * (v - 1))
        total += mp.fprod(v - w for w in tt) / ((v - ti) * lam_prime) * bracket
    return -lam_ti / t_prime * total


@dataclass
class GarnierPoint:
    t: list
    nu: list
    rho: list
    theta: ThetaData
    kappa: object
    leading: object = 0
    degenerate: bool = False
    convention: str = "corrected"

    @property
    def size(self):
        return len(self.t)


def spectral_numerator(fs):
    """Coefficients (highest degree first) of sum_k (H_k)_12 prod_{m != k}(x - t_m)."""
    poles = fs.poles
    deg = len(poles) - 1
    total = [mp.mpc(0)] * (deg + 1)
    for k, H in enumerate(fs.residues):
        prod = [mp.mpc(1)]
        for m, tm in enumerate(poles):
            if m == k:
                continue
            nxt = prod + [mp.mpc(0)]
            for j in range(len(prod)):
                nxt[j + 1] -= tm * prod[j]
            prod = nxt
        for j, c in enumerate(prod):
            total[j] += H[0, 1] * c
    return total


def canonical_order(nu, tol=1e-12):
    """Indices sorting nu by (Re, Im), with ties in Re resolved by Im."""
    def key(j):
        z = nu[j]
        return (round(float(z.real) / tol) * tol, float(z.imag))
    return sorted(range(len(nu)), key=key)


def spectral_coords(fs, th, convention="corrected", degree_tol=1e-10, order=True):
    if not fs.normalized:
        raise ValueError("spectral coordinates need a system normalized at infinity")
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    with mp.workdps(fs.tp.dps):
        coeffs = spectral_numerator(fs)
        scale = max(abs(c) for c in coeffs)
        leading = abs(coeffs[0]) / scale
        if leading > degree_tol:
            raise DegreeDrop(f"leading coefficient {mp.nstr(leading, 5)} relative; "
                             "the residue at infinity is not diagonal")
        body = coeffs[1:]
        if abs(body[0]) / scale < degree_tol:
            raise DegreeDrop("numerator degree below 2n-2")
        nu = list(mp.polyroots(body, maxsteps=400, extraprec=2 * fs.tp.dps))
        if not isinstance(nu, list):
            nu = [nu]
        theta, kappa = th.numeric()
        sign = 1 if convention == "printed" else -1
        rho = []
        for v in nu:
            rho.append(mp.fsum((theta[k] / 2 + sign * H[0, 0]) / (v - tk)
                               for k, (H, tk) in enumerate(zip(fs.residues, fs.poles))))
        if order:
            idx = canonical_order(nu)
            nu = [nu[j] for j in idx]
            rho = [rho[j] for j in idx]
        t = list(fs.poles[:-2])
        degenerate = _degenerate(t, nu)
    return GarnierPoint(t, nu, rho, th, kappa, leading, degenerate, convention)


def _degenerate(t, nu, tol=1e-12):
    pts = list(t) + [mp.mpf(0), mp.mpf(1)]
    for k, v in enumerate(nu):
        if any(abs(v - w) < tol for w in nu[:k]) or any(abs(v - p) < tol for p in pts):
            return True
    return False


# ------------------------------------------------------------ pipeline

@lru_cache(maxsize=16)
def _connection(n, lam):
    return build_connection(n, list(lam))


def _key(lam):
    return tuple(scalar(v) for v in lam)


def garnier_point(lam, tp, convention="corrected"):
    """Restrict, normalize and extract (t, nu, rho) at one lifted point."""
    lam = _key(lam)
    fs = normalize_at_infinity(restrict(_connection(tp.n, lam), tp))
    return spectral_coords(fs, theta_params(lam, tp.n), convention), fs


def _exact_step(h):
    return scalar(Q(str(h))) if isinstance(h, float) else scalar(h)


def _shift(tp, k, step):
    return etale_lift(tp.base.shifted(k, step), dps=tp.dps, ref=tp)


def jacobian_t(tp, h=1e-5):
    """d t_i / d p_k for the etale coordinates p = (a, b, c_1, d_1, ...)."""
    step = _exact_step(h)
    size = 2 * tp.n - 2
    with mp.workdps(tp.dps):
        hv = to_mpc(step)
        J = mp.matrix(size, size)
        for k in range(size):
            up = singular_locus(_shift(tp, k, step))
            dn = singular_locus(_shift(tp, k, -step))
            for i in range(size):
                J[i, k] = (up[i] - dn[i]) / (2 * hv)
        _check_invertible(J)
    return J


def _check_invertible(J, tol=1e-10):
    arr = np.array([[complex(J[i, j]) for j in range(J.cols)] for i in range(J.rows)])
    sv = np.linalg.svd(arr, compute_uv=False)
    if sv[-1] <= tol * max(sv[0], 1.0):
        raise SingularJacobian(f"smallest singular value {sv[-1]:.3e}")
    return sv


def match_labels(ref, nu, ratio=0.5):
    """Permutation p with nu[p[j]] closest to ref[j]; refuses ambiguous
    matches (nearest not well separated from the runner-up)."""
    perm = []
    for j, r in enumerate(ref):
        dist = sorted((abs(v - r), l) for l, v in enumerate(nu))
        if len(dist) > 1 and dist[0][0] > ratio * dist[1][0]:
            raise LabelSwap(f"nu_{j + 1} has two candidates at comparable distance")
        perm.append(dist[0][1])
    if len(set(perm)) != len(perm):
        raise LabelSwap("nearest-neighbour matching is not a bijection")
    return perm


def _central(fn, x, rel=mp.mpf("1e-12")):
    h = rel * (1 + abs(x))
    return (fn(x + h) - fn(x - h)) / (2 * h)


@dataclass
class GarnierResidual:
    """nu_eq[i][j] = |dnu_j/dt_i - dK_i/drho_j|,
    rho_eq[i][j] = |drho_j/dt_i + dK_i/dnu_j|."""
    nu_eq: list
    rho_eq: list
    point: GarnierPoint
    h: object
    jacobian: object = None
    leading: list = field(default_factory=list)

    @property
    def max(self):
        return max(max(row) for row in self.nu_eq + self.rho_eq)


def garnier_residual(lam, tp, h=1e-5, convention="corrected"):
    step = _exact_step(h)
    size = 2 * tp.n - 2
    lam = _key(lam)
    with mp.workdps(tp.dps):
        centre, _ = garnier_point(lam, tp, convention)
        ref = centre.nu
        leading = [centre.leading]
        hv = to_mpc(step)
        Dt = mp.matrix(size, size)
        Dnu = mp.matrix(size, size)
        Drho = mp.matrix(size, size)
        for k in range(size):
            sides = []
            for sgn in (1, -1):
                pt, _ = garnier_point(lam, _shift(tp, k, sgn * step), convention)
                perm = match_labels(ref, pt.nu)
                sides.append((pt.t, [pt.nu[p] for p in perm], [pt.rho[p] for p in perm]))
                leading.append(pt.leading)
            (t1, n1, r1), (t2, n2, r2) = sides
            for i in range(size):
                Dt[i, k] = (t1[i] - t2[i]) / (2 * hv)
                Dnu[i, k] = (n1[i] - n2[i]) / (2 * hv)
                Drho[i, k] = (r1[i] - r2[i]) / (2 * hv)
        _check_invertible(Dt)
        Ji = mp.inverse(Dt)
        dnu = Dnu * Ji
        drho = Drho * Ji
        t0, nu0, rho0 = centre.t, centre.nu, centre.rho
        th = centre.theta
        nu_eq = [[None] * size for _ in range(size)]
        rho_eq = [[None] * size for _ in range(size)]
        for i in range(size):
            for j in range(size):
                def k_of_rho(v):
                    rr = list(rho0)
                    rr[j] = v
                    return hamiltonian(i, t0, nu0, rr, th)

                def k_of_nu(v):
                    nn = list(nu0)
                    nn[j] = v
                    return hamiltonian(i, t0, nn, rho0, th)

                nu_eq[i][j] = abs(dnu[j, i] - _central(k_of_rho, rho0[j]))
                rho_eq[i][j] = abs(drho[j, i] + _central(k_of_nu, nu0[j]))
    return GarnierResidual(nu_eq, rho_eq, centre, step, Dt, leading)


@dataclass
class SolutionSample:
    rows: list
    jacobians: list
    residuals: list
    ranks: list

    @property
    def min_rank(self):
        return min(self.ranks)

    def csv_rows(self):
        out = []
        for (_, pt), res in zip(self.rows, self.residuals):
            vals = list(pt.t) + list(pt.nu) + list(pt.rho)
            out.append([complex(v) for v in vals] + [float(res.max)])
        return out


def _matrix_rank(J):
    return int(np.linalg.matrix_rank(
        np.array([[complex(J[i, j]) for j in range(J.cols)] for i in range(J.rows)])))


def _sample_one(args):
    lam, tp, h, convention = args
    res = garnier_residual(lam, tp, h, convention)
    # mp.matrix does not pickle, so ship nested lists across processes
    J = res.jacobian
    res.jacobian = [[J[i, k] for k in range(J.cols)] for i in range(J.rows)]
    return res


def sample_solution(lam, grid, h=1e-5, convention="corrected", workers=1):
    """Evaluate the solution and its residual on a grid of TildePoints (one
    branch sheet).  ``workers`` > 1 fans the samples out to processes; the
    output order follows ``grid``."""
    lam = _key(lam)
    jobs = [(lam, tp, h, convention) for tp in grid]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sample_one, jobs))
    else:
        results = [_sample_one(j) for j in jobs]
    for r in results:
        r.jacobian = mp.matrix(r.jacobian)
    rows = [(tp, r.point) for tp, r in zip(grid, results)]
    jac = [r.jacobian for r in results]
    return SolutionSample(rows, jac, results, [_matrix_rank(J) for J in jac])
