import random

import mpmath as mp
import pytest
import sympy as sp

import oracles
from forge.algebra import Q
from forge.errors import DegreeDrop, LabelSwap, PoleCollision
from forge.garnier import (GARNIER_DPS, garnier_point, garnier_residual, hamiltonian,
                           jacobian_t, match_labels, sample_solution, spectral_coords,
                           theta_params)
from forge.restriction import (FuchsianSystem, LineParams, etale_lift, restrict_line,
                               singular_locus)

LAM2 = [Q(1, 3), Q(1, 5)]
LAM3 = [Q(1, 3), Q(1, 5), Q(1, 7)]


@pytest.fixture(autouse=True)
def forty_digits():
    with mp.workdps(GARNIER_DPS):
        yield


@pytest.fixture(scope="module")
def tp2():
    return etale_lift(LineParams(2, 3), dps=GARNIER_DPS)


# ------------------------------------------------------------ theta, kappa

def test_theta_n2():
    th = theta_params(LAM2, 2)
    assert th.theta == (Q(1, 2), Q(1, 2), Q(1, 5), Q(-2, 3))
    assert th.theta_inf == Q(8, 15)


def test_theta_n3_pairs():
    th = theta_params(LAM3, 3)
    assert th.theta == (Q(1, 2), Q(1, 2), Q(1, 7), Q(1, 7), Q(1, 5), Q(-2, 3))


def test_kappa_expansion_against_sympy():
    l0, l1 = sp.symbols("l0 l1")
    s = sp.Rational(1, 2) * 2 + l1 + l0 - 1
    printed = sp.expand(((s - 1) ** 2 - ((l0 + l1) ** 2 + 1)) / 4)
    used = sp.expand(((s - 1) ** 2 - (l0 + l1 + 1) ** 2) / 4)
    assert printed == -(l0 + l1) / 2
    assert used == -(l0 + l1)
    rng = random.Random(5)
    for _ in range(5):
        lam = [Q(rng.randint(1, 9), rng.randint(10, 30)) for _ in range(2)]
        th = theta_params(lam, 2)
        sub = {l0: sp.Rational(str(lam[0])), l1: sp.Rational(str(lam[1]))}
        assert oracles.to_sympy(th.kappa_printed) == printed.subs(sub)
        assert oracles.to_sympy(th.kappa) == used.subs(sub)


def test_kappa_zero_at_zero_lambda():
    th = theta_params([0, 0], 2)
    assert th.kappa_printed == 0 and th.kappa == 0


def test_theta_rejects_small_n():
    with pytest.raises(ValueError):
        theta_params([Q(1, 3)], 1)


# ------------------------------------------------------------ Hamiltonian

def _random_inputs(rng, size):
    vals = set()
    while len(vals) < 2 * size + 2:
        vals.add(Q(rng.randint(-30, 30), rng.randint(2, 9)))
    vals.discard(Q(0))
    vals.discard(Q(1))
    vals = sorted(vals)[: 2 * size]
    t, nu = vals[:size], vals[size:]
    rho = [Q(rng.randint(-9, 9), rng.randint(1, 7)) for _ in range(size)]
    theta = [Q(rng.randint(-9, 9), rng.randint(1, 7)) for _ in range(size + 2)]
    return t, nu, rho, theta, Q(rng.randint(-9, 9), rng.randint(1, 7))


def test_zero_momenta_and_kappa_give_zero():
    rng = random.Random(1)
    t, nu, _, theta, _ = _random_inputs(rng, 2)
    for i in range(2):
        assert hamiltonian(i, t, nu, [0, 0], theta, kappa=0) == 0


@pytest.mark.parametrize("seed", range(4))
def test_hamiltonian_matches_independent_evaluator(seed):
    rng = random.Random(seed)
    size = 2 if seed < 2 else 4
    t, nu, rho, theta, kappa = _random_inputs(rng, size)
    S = lambda v: oracles.to_sympy(v)
    for i in range(size):
        ours = hamiltonian(i, t, nu, rho, theta, kappa=kappa)
        exact = oracles.hamiltonian(i, [S(v) for v in t], [S(v) for v in nu],
                                    [S(v) for v in rho], [S(v) for v in theta], S(kappa))
        assert abs(ours - oracles.to_mpc(exact)) < mp.mpf(10) ** -30 * (1 + abs(ours))


def test_hamiltonian_symmetric_under_pair_permutation():
    rng = random.Random(9)
    t, nu, rho, theta, kappa = _random_inputs(rng, 4)
    perm = [2, 0, 3, 1]
    for i in range(4):
        a = hamiltonian(i, t, nu, rho, theta, kappa=kappa)
        b = hamiltonian(i, t, [nu[k] for k in perm], [rho[k] for k in perm], theta, kappa=kappa)
        assert abs(a - b) < mp.mpf(10) ** -30 * (1 + abs(a))


def test_pole_collision_named():
    with pytest.raises(PoleCollision, match="nu_1 - t_1"):
        hamiltonian(1, [Q(2), Q(3)], [Q(2), Q(5)], [1, 1], [1, 1, 1, 1], kappa=1)
    with pytest.raises(PoleCollision, match="Lambda'"):
        hamiltonian(0, [Q(2), Q(3)], [Q(5), Q(5)], [1, 1], [1, 1, 1, 1], kappa=1)


# ------------------------------------------------------------ spectral coordinates

def test_spectral_degree_and_count(tp2):
    pt, fs = garnier_point(LAM2, tp2)
    assert pt.size == 2 and len(pt.nu) == 2 and len(pt.rho) == 2
    assert pt.leading < 1e-30 and not pt.degenerate


def test_diagonal_conjugation_leaves_spectral_data(tp2):
    pt, fs = garnier_point(LAM2, tp2)
    D = mp.diag([mp.mpf(3), mp.mpf(1) / 3])
    Di = mp.inverse(D)
    scaled = FuchsianSystem(fs.poles, fs.labels, [Di * H * D for H in fs.residues],
                            Di * fs.residue_at_infinity * D, tp=fs.tp, normalized=True)
    other = spectral_coords(scaled, pt.theta)
    assert max(abs(a - b) for a, b in zip(pt.nu, other.nu)) < 1e-30
    assert max(abs(a - b) for a, b in zip(pt.rho, other.rho)) < 1e-30


def test_unnormalized_system_is_refused(tp2):
    fs = restrict_line(2, LAM2, tp2)
    th = theta_params(LAM2, 2)
    with pytest.raises(ValueError):
        spectral_coords(fs, th)
    # conjugate so that infinity carries an off-diagonal upper entry
    P = mp.matrix([[1, 1], [0, 1]])
    Pi = mp.inverse(P)
    bent = FuchsianSystem(fs.poles, fs.labels, [Pi * H * P for H in fs.residues],
                          Pi * fs.residue_at_infinity * P, tp=fs.tp, normalized=True)
    with pytest.raises(DegreeDrop):
        spectral_coords(bent, th)


def test_canonical_order_is_lexicographic(tp2):
    pt, _ = garnier_point(LAM2, tp2)
    keys = [(float(v.real), float(v.imag)) for v in pt.nu]
    assert keys == sorted(keys)


# ------------------------------------------------------------ Jacobian

def test_jacobian_against_symbolic_root_derivatives(tp2):
    a, b = sp.symbols("a b")
    A = (a - 1) ** 2 * b ** 2 / a ** 2
    B = 2 * b * (1 + a + b - a * b) / a
    bt = sp.sqrt(4 * (a + b - a * b))
    t1 = (-B + 2 * b / a * bt) / (2 * A)
    t2 = (-B - 2 * b / a * bt) / (2 * A)
    at = {a: 2, b: 3}
    want = [[sp.N(sp.diff(t, v).subs(at), 40) for v in (a, b)] for t in (t1, t2)]
    J = jacobian_t(tp2, 1e-6)
    for i in range(2):
        for k in range(2):
            assert abs(J[i, k] - mp.mpc(complex(want[i][k]))) < 1e-9


def test_jacobian_central_difference_order(tp2):
    J1, J2 = jacobian_t(tp2, 1e-3), jacobian_t(tp2, 5e-4)
    J3 = jacobian_t(tp2, 1e-7)
    e1 = max(abs(J1[i, k] - J3[i, k]) for i in range(2) for k in range(2))
    e2 = max(abs(J2[i, k] - J3[i, k]) for i in range(2) for k in range(2))
    assert 3.5 < e1 / e2 < 4.5


def test_branch_flip_swaps_jacobian_rows():
    plus = jacobian_t(etale_lift(LineParams(2, 3), "+", dps=GARNIER_DPS))
    minus = jacobian_t(etale_lift(LineParams(2, 3), "-", dps=GARNIER_DPS))
    for k in range(2):
        assert abs(plus[0, k] - minus[1, k]) < 1e-12
        assert abs(plus[1, k] - minus[0, k]) < 1e-12


# ------------------------------------------------------------ residual

def test_residual_n2_reference_line(tp2):
    fine = garnier_residual(LAM2, tp2, 1e-5)
    coarse = garnier_residual(LAM2, tp2, 1e-4)
    assert fine.max < 1e-4
    assert 50 < coarse.max / fine.max < 200


def test_residual_n3_reference_line():
    tp = etale_lift(LineParams(2, 3, (Q(1, 2),), (Q(2, 3),)), dps=GARNIER_DPS)
    assert garnier_residual(LAM3, tp, 1e-5).max < 1e-4


def test_printed_momentum_sign_fails(tp2):
    assert garnier_residual(LAM2, tp2, 1e-5, convention="printed").max > 1e-2


def test_label_matching():
    ref = [mp.mpc(0), mp.mpc(1)]
    assert match_labels(ref, [mp.mpc(1.001), mp.mpc(0.001)]) == [1, 0]
    with pytest.raises(LabelSwap):
        match_labels(ref, [mp.mpc(0.5), mp.mpc(0.5001)])


def test_sample_solution_rank_and_rows(tp2):
    grid = [tp2, etale_lift(LineParams(Q(21, 10), 3), dps=GARNIER_DPS, ref=tp2)]
    sample = sample_solution(LAM2, grid)
    assert sample.min_rank == 2
    assert all(r.max < 1e-4 for r in sample.residuals)
    rows = sample.csv_rows()
    assert len(rows) == 2 and len(rows[0]) == 7
    assert abs(rows[0][0] - complex(singular_locus(tp2)[0])) < 1e-12


def test_parallel_sampling_matches_serial(tp2):
    grid = [tp2, etale_lift(LineParams(Q(21, 10), 3), dps=GARNIER_DPS, ref=tp2)]
    serial = sample_solution(LAM2, grid).csv_rows()
    parallel = sample_solution(LAM2, grid, workers=2).csv_rows()
    assert serial == parallel
