import random

import pytest
import sympy as sp

import oracles
from forge.algebra import Q, rf_eval
from forge.connection import (ConnMatrix, GaugeMatrix, build_alpha, build_alpha_s,
                              build_connection, cover_map, curvature, curvature_is_zero,
                              gauge, gauge_m1, gauge_m2, mobius_transform, pull_riccati,
                              riccati, s_to_xy, split_forms, twist, u_to_s, u_chart,
                              verify_split, xy_chart)
from forge.algebra import d
from forge.errors import ChartMismatch, SingularGauge, SingularMobius

LAM2 = [Q(1, 3), Q(1, 5)]
LAM3 = [Q(1, 3), Q(1, 5), Q(1, 7)]


def _random_point(rng, names):
    return {v: Q(rng.randint(-9, 9), rng.randint(1, 5)) for v in names}


@pytest.mark.parametrize("n,lam", [(2, LAM2), (3, LAM3)])
def test_entries_match_independent_sympy_construction(n, lam):
    A = build_connection(n, lam)
    coords, SA = oracles.connection(n, [oracles.to_sympy(v) for v in lam])
    rng = random.Random(11)
    checked = 0
    while checked < 4:
        pt = _random_point(rng, A.chart.coords)
        sp_pt = {s: oracles.to_sympy(pt[str(s)]) for s in coords}
        try:
            ours = {(i, j, v): rf_eval(A[i, j][v], pt) for i in range(2) for j in range(2)
                    for v in A.chart.coords}
            theirs = {(i, j, str(c)): SA[i, j][c].subs(sp_pt) for i in range(2)
                      for j in range(2) for c in coords}
        except Exception:
            continue
        if any(val.has(sp.zoo, sp.nan) for val in theirs.values()):
            continue
        for key, val in ours.items():
            assert oracles.to_sympy(val) == sp.simplify(theirs[key]), key
        checked += 1


def test_trace_free():
    A = build_connection(3, "sym")
    assert A.trace().is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_flat_with_symbolic_lambdas(n):
    assert curvature_is_zero(curvature(build_connection(n)))


def test_flatness_cross_checked_in_sympy_at_points():
    rng = random.Random(3)
    lam = [sp.Rational(2, 7), sp.Rational(3, 11)]
    for _ in range(3):
        pt = {oracles.X: sp.Rational(rng.randint(2, 9), rng.randint(1, 4)),
              oracles.Y: sp.Rational(rng.randint(-9, -1), rng.randint(1, 4))}
        assert all(v == 0 for v in oracles.curvature_at(2, lam, pt))


def test_perturbed_connection_is_not_flat():
    A = build_connection(2, LAM2)
    x = A.chart.var("x")
    bump = A.chart.dvar("y") * x
    B = ConnMatrix(A.chart, [[A[0, 0], A[0, 1] + bump], [A[1, 0], A[1, 1]]])
    assert not curvature_is_zero(curvature(B))


def test_s_chart_forms_agree_with_xy_forms():
    for n in (2, 3):
        xy, s = build_alpha(n, "sym"), build_alpha_s(n, "sym")
        sub = s_to_xy(n, "sym")
        assert sub.pull_form(xy.a0) == s.a0
        assert sub.pull_form(xy.a1) == s.a1
        assert sub.pull_form(xy.a2) == s.a2
        for a, b in zip(xy.a0i, s.a0i):
            assert sub.pull_form(a) == b


def test_gauge_acts_on_riccati_by_mobius():
    A = build_connection(2, "sym")
    M = gauge_m2(A.chart)
    assert riccati(gauge(A, M)) == mobius_transform(riccati(A), [[M[i, j] for j in range(2)]
                                                                  for i in range(2)])


def test_descent_through_the_double_cover():
    n = 2
    uc = u_chart(n, "sym")
    omega0, psi = split_forms(n, "sym", uc)
    half = (omega0 + psi) * Q(1, 2)
    split = ConnMatrix.diag(uc, half, -half)
    # gauge back by M1 and twist off d log(u0 - u1)/2; the result must be the
    # pull-back of the system obtained on the xy chart
    A = build_connection(n, "sym")
    xy = A.chart
    B = gauge(twist(A, d(xy.var("y"), xy) * (Q(1, 2) / xy.var("y"))), gauge_m2(xy).inverse())
    up = ConnMatrix(uc, [[cover_map(n, "sym").pull_form(B[i, j]) for j in range(2)]
                         for i in range(2)])
    u = uc.var("u0") - uc.var("u1")
    back = twist(gauge(split, gauge_m1(uc)), d(u, uc) * (Q(-1, 2) / u))
    assert (back - up).reduce().is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_split_recovery(n):
    rep = verify_split(n)
    assert rep.off_diagonal_zero and rep.diagonal_match


def test_split_fails_without_the_twist():
    A = build_connection(2, LAM2)
    xy = A.chart
    B = gauge(A, gauge_m2(xy).inverse())
    cov = cover_map(2, LAM2)
    C = ConnMatrix(cov.source, [[cov.pull_form(B[i, j]) for j in range(2)] for i in range(2)])
    D = gauge(C, gauge_m1(cov.source).inverse())
    omega0, psi = split_forms(2, LAM2, cov.source)
    half = (omega0 + psi) * Q(1, 2)
    assert not (D - ConnMatrix.diag(cov.source, half, -half)).is_zero()


def test_singular_gauge_and_mobius_raise():
    chart = xy_chart(2, LAM2)
    x = chart.var("x")
    M = GaugeMatrix(chart, [[x, x], [1, 1]])
    with pytest.raises(SingularGauge):
        M.inverse()
    R = riccati(build_connection(2, LAM2))
    with pytest.raises(SingularMobius):
        mobius_transform(R, [[x, x], [1, 1]])


def test_mixed_charts_rejected():
    a = xy_chart(2, LAM2).dvar("x")
    b = u_chart(2, LAM2).dvar("u0")
    with pytest.raises(ChartMismatch):
        a + b


def test_composite_cover_equals_direct_cover():
    n = 2
    direct = cover_map(n, "sym")
    composite = s_to_xy(n, "sym").after(u_to_s(n, "sym"))
    al = build_alpha(n, "sym")
    assert direct.pull_form(al.a0) == composite.pull_form(al.a0)
    R = riccati(build_connection(n, "sym"))
    assert pull_riccati(R, direct) == pull_riccati(R, composite)
