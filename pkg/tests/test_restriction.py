import mpmath as mp
import numpy as np
import pytest
import sympy as sp

import oracles
from forge.algebra import Q
from forge.errors import CollidingPoles, NonGeneric, SingularConjugator
from forge.restriction import (LineParams, closed_form_residues, conjugator,
                               connected_samples, corrected_pole_formulas, draw_line,
                               eigenvalues, etale_lift, expected_exponents,
                               normalize_at_infinity, pole_formula_deviations, pole_labels,
                               residue_report, restrict_line, singular_locus)

LAM2 = [Q(1, 3), Q(1, 5)]
LAM3 = [Q(1, 3), Q(1, 5), Q(1, 7)]
LINE3 = LineParams(2, 3, (Q(1, 2),), (Q(2, 3),))


@pytest.fixture(autouse=True)
def thirty_digits():
    with mp.workdps(30):
        yield


def test_reference_line_poles():
    poles = singular_locus(etale_lift(LineParams(2, 3)))
    assert abs(poles[0] - mp.mpc(0, mp.mpf(4) / 3)) < 1e-25
    assert abs(poles[1] - mp.mpc(0, -mp.mpf(4) / 3)) < 1e-25
    assert poles[2:] == [0, 1]


@pytest.mark.parametrize("seed", range(4))
def test_poles_are_roots_of_the_restricted_quadratics(seed):
    n = 3
    p = draw_line(np.random.default_rng(seed), n)
    tp = etale_lift(p)
    poles = singular_locus(tp)
    quads = oracles.line_quadratics(n, p.a, p.b, p.c, p.d)
    for k, q in enumerate(quads):
        roots = sp.Poly(q, oracles.XT).nroots(n=30)
        ours = poles[2 * k:2 * k + 2]
        for r in roots:
            assert min(abs(mp.mpc(complex(r)) - t) for t in ours) < 1e-12


def test_branch_flip_swaps_conic_pair():
    p = LineParams(2, 3)
    plus, minus = singular_locus(etale_lift(p, "+")), singular_locus(etale_lift(p, "-"))
    assert abs(plus[0] - minus[1]) < 1e-25 and abs(plus[1] - minus[0]) < 1e-25


def test_continuation_keeps_labels():
    samples = connected_samples(LINE3, count=4)
    prev = singular_locus(samples[0])
    for tp in samples[1:]:
        cur = singular_locus(tp)
        for k in range(4):
            nearest = min(range(4), key=lambda j: abs(cur[j] - prev[k]))
            assert nearest == k
        prev = cur


def test_residues_at_rational_poles_match_sympy():
    ent = oracles.restricted(2, [sp.Rational(1, 3), sp.Rational(1, 5)], 2, 3)
    fs = restrict_line(2, LAM2, etale_lift(LineParams(2, 3)))
    for label, root in (("0", 0), ("1", 1), ("t1", sp.Rational(4, 3) * sp.I),
                        ("t2", -sp.Rational(4, 3) * sp.I)):
        want = oracles.residue(ent, root)
        H = fs.residue(label)
        for i in range(2):
            for j in range(2):
                assert abs(H[i, j] - oracles.to_mpc(want[i][j])) < 1e-25, (label, i, j)
    H1 = fs.residue("1")
    assert abs(H1[0, 0] - mp.mpf(1) / 3) < 1e-25 and abs(H1[0, 1] - mp.mpf(2) / 15) < 1e-25


def test_residue_sum_vanishes():
    fs = restrict_line(3, LAM3, etale_lift(LINE3))
    assert fs.residue_sum_error() < 1e-25


@pytest.mark.parametrize("n,lam,p", [(2, LAM2, LineParams(2, 3)), (3, LAM3, LINE3)])
def test_local_exponents(n, lam, p):
    fs = restrict_line(n, lam, etale_lift(p))
    rep = residue_report(fs, lam)
    assert rep.max_exponent_deviation() < 1e-20
    expect = expected_exponents(lam, n)
    assert set(expect) == set(pole_labels(n)) | {"inf"}


def test_printed_conic_pole_formula_is_logged_as_wrong():
    tp = etale_lift(LineParams(2, 3))
    recs = {r["pole"]: r for r in pole_formula_deviations(tp)}
    assert abs(recs["t1"]["printed"] - mp.mpc(0, mp.mpf(2) / 3)) < 1e-25
    assert abs(recs["t1"]["quadratic_at_printed"] - 3) < 1e-25
    assert recs["t1"]["distance"] > 0.5


def test_corrected_conic_formula_matches_roots():
    for p in (LineParams(2, 3), LineParams(Q(-5, 3), Q(7, 2)), LineParams(Q(9, 4), Q(-1, 3))):
        tp = etale_lift(p)
        roots = singular_locus(tp)[:2]
        fixed = corrected_pole_formulas(tp)
        assert max(abs(a - b) for a, b in zip(roots, fixed)) < 1e-20


def test_closed_forms_agree_where_expected():
    tp = etale_lift(LINE3)
    fs = restrict_line(3, LAM3, tp)
    closed = closed_form_residues(tp, LAM3)
    for lab in ("t1", "t2", "0", "inf"):
        H = fs.residue(lab)
        assert max(abs(closed[lab][i, j] - H[i, j]) for i in range(2) for j in range(2)) < 1e-20
    deviating = {r.label for r in residue_report(fs, LAM3).deviations()}
    assert {"t3", "t4"} <= deviating
    ev = eigenvalues(closed["t3"])
    assert max(abs(e.real) for e in ev) < 1e-20   # printed sign gives +-i*lambda/2


def test_normalization_diagonalizes_infinity():
    fs = restrict_line(2, LAM2, etale_lift(LineParams(2, 3)))
    nf = normalize_at_infinity(fs)
    H = nf.residue_at_infinity
    assert abs(H[0, 1]) < 1e-25 and abs(H[1, 0]) < 1e-25
    assert abs(H[0, 0] - mp.mpf(4) / 15) < 1e-25
    assert nf.normalized and not fs.normalized


def test_conjugator_singular_at_a_one():
    with pytest.raises(SingularConjugator):
        conjugator(1)


@pytest.mark.parametrize("params", [
    dict(a=0, b=3), dict(a=1, b=3), dict(a=2, b=0), dict(a=2, b=1), dict(a=2, b=-2),
])
def test_non_generic_lines_rejected(params):
    with pytest.raises(NonGeneric):
        etale_lift(LineParams(**params))


def test_colliding_poles_detected():
    # t3 or t4 of f - z^2 pushed onto the conic pair by d -> 0, c -> 0
    tp = etale_lift(LineParams(2, 3, (Q(0),), (Q(1, 10**14),)))
    with pytest.raises(CollidingPoles):
        singular_locus(tp)
