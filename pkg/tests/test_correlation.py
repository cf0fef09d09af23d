import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from micromaser.core import MaserParams, moments, q, q_prime, stationary_distribution, theta_eff_sq
from micromaser.correlation import (AtomCorrelator, atom_statistics, build_generator, chi,
                                    dense_spectrum, exact_correlation, fit_xi_A, gamma_A,
                                    joint_probability, lambda_nz, mean_field_peak, mean_field_xi,
                                    xi_ansatz_E, xi_barrier, xi_master_M, xi_master_peak,
                                    xi_mean_field, xi_mean_field_at, xi_sumrule, xi_thermal,
                                    _mf_x0)
from micromaser.errors import DomainError, NoBarrierError, NoMaserBranchError
from micromaser.phase import theta_maser_maser

NB = 0.15

point_st = st.builds(
    MaserParams,
    a=st.floats(0.0, 1.0),
    n_b=st.floats(0.02, 1.5),
    Delta=st.sampled_from([0.0, 0.3, 0.5]),
    theta=st.floats(0.0, 12.0),
    N=st.sampled_from([20, 50, 100]),
)


# -- generator ----------------------------------------------------------------------

def test_stationarity_residual(warm):
    for th in (0.5, 1.0, 3.0, 6.661, 12.0):
        g = build_generator(warm.with_(theta=th))
        r = g.matvec(g.stationary)
        assert np.max(np.abs(r)) < 1e-10


@given(point_st)
def test_symmetrized_band_formula(p):
    g = build_generator(p)
    n = np.arange(g.block - 1, dtype=float)
    qn1 = q((n + 1) / p.N, p.theta, p.Delta)
    ref = -np.sqrt(((1 + p.n_b) * (n + 1) + p.N * p.b * qn1) * (p.n_b * (n + 1) + p.N * p.a * qn1))
    assert np.allclose(g.sym_off, ref, rtol=1e-12, atol=0)


@given(point_st)
def test_column_sums(p):
    g = build_generator(p)
    L = g.dense()
    # Probability conservation: columns of L sum to zero.
    assert np.allclose(L.sum(axis=0), 0.0, atol=1e-9 * max(1.0, p.N))
    c = g.m_column_sums(+1) + g.m_column_sums(-1)
    assert np.allclose(c[:-1], 1.0, atol=1e-14)


def test_a_zero_spectrum_is_integer_ladder():
    p = MaserParams(a=0.0, n_b=NB, theta=0.0, N=100)
    ev = dense_spectrum(build_generator(p, dim=120))
    assert np.allclose(ev[:5], [0, 1, 2, 3, 4], atol=1e-8)


@given(point_st)
def test_spectrum_real_one_zero(p):
    ev = dense_spectrum(build_generator(p))
    assert ev.min() > -1e-10 * max(1.0, ev.max())
    assert np.count_nonzero(np.abs(ev) < 1e-10 * max(1.0, ev.max())) == 1


def test_equilibrium_gap_is_one():
    p = MaserParams(a=NB / (1 + 2 * NB), n_b=NB, theta=0.0, N=100)
    assert lambda_nz(build_generator(p, dim=64)) == pytest.approx(1.0, abs=1e-6)
    assert dense_spectrum(build_generator(p, dim=64))[1] == pytest.approx(1.0, abs=1e-6)


def test_sturm_matches_dense():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = MaserParams(a=rng.uniform(0.3, 1.0), n_b=rng.uniform(0.05, 1.0),
                        Delta=rng.choice([0.0, 0.4]), theta=rng.uniform(0.2, 8.0), N=40)
        g = build_generator(p, dim=128)
        assert lambda_nz(g) == pytest.approx(dense_spectrum(g)[1], rel=1e-8)


def test_sturm_matches_dense_grid():
    for a in (0.4, 0.7, 1.0):
        for th in (0.5, 2.0, 6.0):
            for nb in (0.05, 0.15, 1.0):
                g = build_generator(MaserParams(a=a, n_b=nb, theta=th, N=30), dim=100)
                assert lambda_nz(g) == pytest.approx(dense_spectrum(g)[1], rel=1e-8)


@pytest.mark.parametrize("N,theta", [(100, 1.0), (400, 1.0), (1600, 1.0), (50, 6.661), (150, 6.661),
                                     (100, 12.0)])
def test_truncation_stability(N, theta):
    p = MaserParams(a=1, n_b=NB, theta=theta, N=N)
    g = build_generator(p)
    g2 = build_generator(p, dim=2 * g.dim)
    assert lambda_nz(g2) == pytest.approx(lambda_nz(g), rel=1e-8)


def test_trapping_block_decoupled(cold):
    p = cold.with_(theta=math.pi / math.sqrt(0.3))
    g = build_generator(p)
    assert g.decoupled and g.block == 30
    r = exact_correlation(p)
    assert r.lambda_nz > 0 and math.isfinite(r.xi)


# -- atoms ----------------------------------------------------------------------------

def test_atom_statistics_limits():
    pp, pm = atom_statistics(MaserParams(a=0.0, n_b=NB, theta=0.0, N=50))
    assert (pp, pm) == (0.0, 1.0)
    pp, pm = atom_statistics(MaserParams(a=1.0, n_b=NB, theta=0.0, N=50))
    assert (pp, pm) == (1.0, 0.0)


def test_atom_statistics_brute_force():
    p = MaserParams(a=1, n_b=NB, theta=2.0, N=50)
    d = stationary_distribution(p)
    n = np.arange(d.n_max + 1)
    # Excited on exit: entered excited and did not emit, or entered ground and absorbed.
    ref = np.sum(d.probs * (p.a * (1 - q((n + 1) / 50, 2.0)) + p.b * q(n / 50, 2.0)))
    pp, pm = atom_statistics(p)
    assert pp == pytest.approx(ref, rel=1e-12)
    assert pp + pm == pytest.approx(1.0, abs=1e-12)


def test_joint_probability_properties(warm):
    p = warm.with_(theta=2.0, N=50)
    ac = AtomCorrelator(p)
    lam = exact_correlation(p).lambda_nz
    for t in (0.0, 0.1, 0.7, 2.0, 5.0):
        tot = sum(ac.joint(s1, s2, t) for s1 in (1, -1) for s2 in (1, -1))
        assert tot == pytest.approx(1.0, abs=1e-10)
        assert abs(ac.joint(1, -1, t) - ac.joint(-1, 1, t)) < 1e-10
    t = 50 / lam
    for s1 in (1, -1):
        for s2 in (1, -1):
            ps1 = ac.p_plus if s1 == 1 else ac.p_minus
            ps2 = ac.p_plus if s2 == 1 else ac.p_minus
            assert ac.joint(s1, s2, t) == pytest.approx(ps1 * ps2, abs=1e-8)
    assert joint_probability(p, 1, 1, 0.3) == pytest.approx(ac.joint(1, 1, 0.3), rel=1e-12)


@given(st.floats(0.0, 1.0), st.floats(0.5, 8.0), st.floats(0, 20))
def test_joint_symmetry_random(a, theta, t):
    ac = AtomCorrelator(MaserParams(a=a, n_b=NB, theta=theta, N=30))
    assert abs(ac.joint(1, -1, t) - ac.joint(-1, 1, t)) < 1e-10


def test_gamma_A_bounds_and_decay(warm):
    p = warm.with_(theta=2.0, N=50)
    lam = exact_correlation(p).lambda_nz
    vals = gamma_A(p, np.array([0.0, 1.0, 3.0, 100 / lam]))
    assert np.all(np.abs(vals) <= 1)
    assert abs(vals[-1]) < 1e-12


def test_gamma_A_tail_fit(warm):
    p = warm.with_(theta=2.0, N=50)
    lam = exact_correlation(p).lambda_nz
    assert fit_xi_A(p) * lam == pytest.approx(1.0, rel=0.01)


def test_gamma_A_degenerate():
    with pytest.raises(DomainError):
        gamma_A(MaserParams(a=1.0, theta=0.0, N=50), 1.0)


# -- approximations -------------------------------------------------------------------

def test_xi_E_half_large_N():
    assert xi_thermal(MaserParams(a=0.5, theta=3.0, Delta=0.3)) == 1.0
    errs = [abs(xi_ansatz_E(MaserParams(a=0.5, n_b=NB, Delta=0.3, theta=2.0, N=N)).xi - 1)
            for N in (100, 1000, 10000)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


def test_xi_E_deep_thermal():
    p = MaserParams(a=0.25, n_b=NB, Delta=0.5, theta=3.0, N=1e4)
    assert xi_ansatz_E(p).xi == pytest.approx(xi_thermal(p), rel=0.01)


def test_xi_E_first_peak_vs_exact():
    for th in np.linspace(5.5, 7.0, 7):
        p = MaserParams(a=0.25, n_b=NB, Delta=0.5, theta=th, N=100)
        assert xi_ansatz_E(p).xi == pytest.approx(exact_correlation(p).xi, rel=0.10)


def test_xi_master_peak():
    assert xi_master_peak(1, NB, 0, 100) == pytest.approx(0.5 * math.sqrt(300 / 1.15), rel=1e-12)
    assert xi_master_peak(1, NB, 0, 100) == pytest.approx(8.07, abs=0.01)
    assert xi_master_peak(1, NB, 0, 400) / xi_master_peak(1, NB, 0, 100) == pytest.approx(2, rel=1e-6)
    assert xi_master_peak(0.5, NB, 0, 100) == 0
    with pytest.raises(DomainError):
        xi_master_peak(0.4, NB, 0, 100)


def test_master_beta_series_continuity():
    for a in (0.7, 1.0):
        lo = xi_master_M(MaserParams(a=a, n_b=NB, Delta=0.999e-3 / 2, theta=2.0))
        hi = xi_master_M(MaserParams(a=a, n_b=NB, Delta=1.001e-3 / 2, theta=2.0))
        assert lo.beta == pytest.approx(hi.beta, rel=1e-9)


def test_chi_limits():
    assert chi(1e-12) == pytest.approx(math.sqrt(3), rel=1e-12)
    assert chi(0.999e-3) == pytest.approx(chi(1.001e-3), rel=1e-8)


def test_mean_field_peak_consistent():
    phi, val = mean_field_peak(1, NB, 100)
    assert val == pytest.approx(xi_master_peak(1, NB, 0, 100), rel=1e-12)
    curve = xi_mean_field(MaserParams(a=1, n_b=NB, N=100), np.linspace(1e-3, 1.0, 2000))
    assert curve.xi.max() == pytest.approx(val, rel=0.05)


def test_mean_field_requires_maser_weight():
    with pytest.raises(NoMaserBranchError):
        xi_mean_field(MaserParams(a=0.5, n_b=NB, N=100))


def test_mean_field_x0_solves_transcendental_equation():
    rng = np.random.default_rng(2)
    for _ in range(10):
        a, D, N = rng.uniform(0.6, 1.0), rng.choice([0.0, 0.3]), rng.choice([100, 1000])
        phi = rng.uniform(0.05, 3.0)
        f = a / (2 * a - 1)
        x0 = float(_mf_x0(phi, a, NB, D, N))
        th = phi / math.sqrt(x0 + f / N + D * D)
        res = x0 - NB / N - (2 * a - 1) * q(x0 + f / N, th, D)
        assert abs(res) < 1e-10
        # Mean-field xi uses the derivative of q at x0 + f/N.
        ref = 1 / (1 - (2 * a - 1) * q_prime(x0 + f / N, th, D))
        assert float(mean_field_xi(phi, x0, a, D, f / N)) == pytest.approx(ref, rel=1e-9)


def test_thermal_identity():
    for a, D, th in [(0.3, 0.5, 2.0), (0.8, 0.4, 0.6), (0.45, 0.2, 3.3)]:
        p = MaserParams(a=a, n_b=NB, Delta=D, theta=th, N=1e12)
        ref = 1 / (1 - (2 * a - 1) * theta_eff_sq(th, D))
        assert xi_thermal(p) == pytest.approx(ref, rel=1e-12)
        m = xi_master_M(p)
        assert 1 / abs(m.alpha) == pytest.approx(ref, rel=1e-12)
        # Mean field with x0 = 0 and no 1/N shift sits at phi = theta |Delta|.
        assert float(mean_field_xi(th * D, 0.0, a, D, 0.0)) == pytest.approx(ref, rel=1e-12)


def test_hierarchy_first_peak(warm):
    for th in (0.9, 1.0, 1.05, 1.1, 1.2):
        p = warm.with_(theta=th)
        ex = exact_correlation(p).xi
        assert abs(xi_mean_field_at(p) - ex) <= abs(xi_master_M(p).xi - ex)


# -- barrier ---------------------------------------------------------------------------

def test_barrier_needs_two_minima(warm):
    with pytest.raises(NoBarrierError):
        xi_barrier(warm.with_(theta=3.0))


def test_barrier_terms_comparable_at_transition(warm):
    b = xi_barrier(warm.with_(theta=theta_maser_maser(1, NB, 0, 0)))
    assert abs(b.log_f0 - b.log_f2) < math.log(10)


def test_barrier_off_transition(warm):
    p = warm.with_(theta=5.0)
    r = xi_barrier(p).xi / exact_correlation(p).xi
    assert 0.2 < r < 5


def test_exponential_growth_slope():
    th = theta_maser_maser(1, NB, 0, 0)
    Ns = np.array([50, 100, 150])
    lx = [exact_correlation(MaserParams(a=1, n_b=NB, theta=th, N=int(N))).log_xi for N in Ns]
    slope = np.polyfit(Ns, lx, 1)[0]
    dv = xi_barrier(MaserParams(a=1, n_b=NB, theta=th, N=100)).delta_v0
    assert slope == pytest.approx(dv, rel=0.15)


# -- sum rule ------------------------------------------------------------------------

def test_sumrule_equilibrium():
    p = MaserParams(a=NB / (1 + 2 * NB), n_b=NB, theta=0.0, N=100)
    assert xi_sumrule(p).xi == pytest.approx(1.0, rel=0.05)


@pytest.mark.parametrize("theta", [5.0, 6.0, 7.0])
def test_sumrule_vs_exact_trapping_regime(cold, theta):
    p = cold.with_(theta=theta)
    assert xi_sumrule(p).xi == pytest.approx(exact_correlation(p).xi, rel=0.20)


def test_sumrule_vs_exact_near_onset(cold):
    p = cold.with_(theta=1.0)
    assert xi_sumrule(p).xi == pytest.approx(exact_correlation(p).xi, rel=0.20)


@pytest.mark.parametrize("theta", [1.0, 3.0, 5.0])
def test_sumrule_matches_spectral_sum(cold, theta):
    # The right-hand side equals sum_n (1/lambda_n - 1/n) over the full spectrum;
    # the truncated dense spectrum misses a tail of order 1/dim.
    p = cold.with_(theta=theta)
    ev = dense_spectrum(build_generator(p, dim=800))
    n = np.arange(1, ev.size)
    spectral = float(np.sum(1 / ev[1:] - 1 / n))
    assert xi_sumrule(p).xi - 1 == pytest.approx(spectral, abs=0.1)
