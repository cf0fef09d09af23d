import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from micromaser.core import MaserParams
from micromaser.errors import DomainError, NoCrossingError, NoTransitionError
from micromaser.phase import (classify, count_steps, critical_detuning, dxdtheta,
                              order_parameter_vs_a, phase_diagram, theta0_star, theta_k,
                              theta_maser_maser, theta_maser_thermal, theta_thermal_maser,
                              thermal_extrema, thermal_mean_profile, triple_points)
from micromaser.potential import enumerate_saddles, tan_root, theta_of_phi, x_of_phi

NB = 0.15


# -- closed forms ---------------------------------------------------------------------

def test_theta0_star_examples():
    assert theta0_star(1, 0) == 1
    assert theta0_star(1, 0.5) == pytest.approx(1.047198, abs=1e-6)
    assert theta0_star(0.75, 0) == pytest.approx(math.sqrt(2), rel=1e-14)
    # Series branch is continuous with the closed form.
    assert theta0_star(0.8, 0.9e-6) == pytest.approx(theta0_star(0.8, 1.1e-6), rel=1e-11)
    with pytest.raises(NoTransitionError):
        theta0_star(0.6, 0.5)


@pytest.mark.parametrize("k,ref", [(1, 4.603), (2, 7.790), (3, 10.950), (4, 14.102), (5, 17.250)])
def test_theta_k(k, ref):
    assert theta_k(1.0, k) == pytest.approx(ref, abs=1e-3)


def test_theta_k_scaling():
    for k in (1, 2, 3):
        assert theta_k(0.6, k) * math.sqrt(0.2) == pytest.approx(theta_k(1.0, k), rel=1e-12)


@pytest.mark.parametrize("k,ref", [(0, 5.235988), (1, 11.519)])
def test_theta_maser_thermal(k, ref):
    assert theta_maser_thermal(1.0, 0.5, k) == pytest.approx(ref, abs=1e-3)


def test_theta_maser_thermal_no_detuning():
    assert theta_maser_thermal(1.0, 0.0, 0) == math.inf
    assert theta_maser_thermal(1.0, 1e-8, 0) > 1e8


def test_theta_maser_thermal_vs_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = rng.uniform(0.8, 1.0)
        D = rng.uniform(0.2, 0.6)
        k = int(rng.integers(0, 3))
        ref = theta_maser_thermal(a, D, k)

        def has_min(th):
            return any(s.is_minimum and s.branch_k == k for s in
                       enumerate_saddles(MaserParams(a=a, n_b=NB, Delta=D, theta=th),
                                         with_potential=False))

        lo, hi = ref - 0.3, ref + 0.3
        assert has_min(lo) and not has_min(hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if has_min(mid) else (lo, mid)
        assert 0.5 * (lo + hi) == pytest.approx(ref, abs=1e-8)


def test_critical_theta_independent_of_n_b():
    for nb in (0.01, 0.15, 1.0):
        for k in (1, 2):
            th = theta_k(1.0, k)
            below = enumerate_saddles(MaserParams(a=1, n_b=nb, theta=th - 1e-6), with_potential=False)
            above = enumerate_saddles(MaserParams(a=1, n_b=nb, theta=th + 1e-6), with_potential=False)
            assert len(above) == len(below) + 2


# -- first-order lines --------------------------------------------------------------

@pytest.mark.parametrize("k,ref", [(0, 6.6610), (1, 12.035), (2, 17.413)])
def test_theta_maser_maser(k, ref):
    assert theta_maser_maser(1.0, NB, 0.0, k) == pytest.approx(ref, rel=5e-3)


def test_theta_maser_maser_detuned():
    assert theta_maser_maser(1.0, NB, 0.5, 2) == pytest.approx(17.425, rel=5e-3)


def test_theta_maser_maser_residual():
    from micromaser.phase import _min_phi
    from micromaser.potential import v0_on_branch
    th = theta_maser_maser(1.0, NB, 0.0, 1)
    p1, p2 = _min_phi(th, 1.0, 0.0, 1), _min_phi(th, 1.0, 0.0, 2)
    assert abs(v0_on_branch(p1, 1, NB, 0) - v0_on_branch(p2, 1, NB, 0)) < 1e-10


def test_separated_lobes_have_no_crossing():
    with pytest.raises(NoCrossingError):
        theta_maser_maser(1.0, NB, 0.5, 0)


@pytest.mark.parametrize("k,ref", [(1, 6.193), (2, 11.906)])
def test_theta_thermal_maser(k, ref):
    assert theta_thermal_maser(1.0, NB, 0.5, k) == pytest.approx(ref, rel=5e-3)


def test_theta_thermal_maser_absent_without_detuning():
    with pytest.raises(NoTransitionError):
        theta_thermal_maser(1.0, NB, 0.0, 1)


# -- critical detuning and triple points ---------------------------------------------

def test_critical_detuning_first():
    assert critical_detuning(NB, 0) == pytest.approx(0.408, abs=2e-3)


def test_critical_detuning_bounded():
    for k in range(3):
        assert 0 < critical_detuning(NB, k) ** 2 < 1


def test_critical_detuning_brute_force():
    # Below the critical value lobes k and k+1 share a maser-maser line; above it
    # branch k exits to the thermal phase before branch k+1 takes over.
    for k in (0, 1):
        Dc = critical_detuning(NB, k)
        theta_maser_maser(1.0, NB, Dc - 0.005, k)
        with pytest.raises(NoCrossingError):
            theta_maser_maser(1.0, NB, Dc + 0.005, k)
        D = Dc + 0.005
        assert theta_maser_thermal(1.0, D, k) < theta_thermal_maser(1.0, NB, D, k + 1)


def test_critical_detuning_ordering():
    assert critical_detuning(NB, 1) < critical_detuning(NB, 0)


def test_lobes_connected_below_critical_detuning():
    theta_maser_maser(1.0, NB, 0.40, 0)
    with pytest.raises(NoCrossingError):
        theta_maser_maser(1.0, NB, 0.42, 0)


def test_triple_points():
    tps = {tp.k: tp for tp in triple_points(NB, 0.5)}
    assert tps[2].a == pytest.approx(0.98, abs=0.02) and tps[2].theta == pytest.approx(17.78, abs=0.1)
    assert tps[3].a == pytest.approx(0.96, abs=0.02) and tps[3].theta == pytest.approx(24.04, abs=0.1)


def test_triple_points_need_detuning():
    with pytest.raises(DomainError):
        triple_points(NB, 0.0)


# -- classification ------------------------------------------------------------------

def test_classify_thermal():
    p = MaserParams(a=1, n_b=NB, theta=0.9, N=100)
    pp = classify(p)
    assert pp.phase == "thermal"
    assert pp.order_parameter == pytest.approx((NB + 0.81) / (1 - 0.81) / 100, rel=1e-12)


def test_classify_maser_branch0():
    pp = classify(MaserParams(a=1, n_b=NB, theta=5.0, N=1000))
    phi = brentq(lambda f: f / math.sin(f) - 5.0, 1.0, 3.0, xtol=1e-15)
    assert (pp.phase, pp.branch) == ("maser", 0)
    assert pp.order_parameter == pytest.approx(math.sin(phi) ** 2, rel=1e-12)


@given(st.floats(0.0, 30.0))
def test_classify_below_half_is_thermal(theta):
    assert classify(MaserParams(a=0.4, n_b=NB, theta=theta, N=100)).phase == "thermal"


def test_classify_coexistence_at_transition():
    th = theta_maser_maser(1.0, NB, 0.0, 0)
    pp = classify(MaserParams(a=1, n_b=NB, theta=th, N=1000))
    assert pp.phase == "coexistence" and set(pp.competitors) == {0, 1}


def test_order_parameter_continuous_at_onset():
    pp = classify(MaserParams(a=1, n_b=NB, theta=1 + 1e-4, N=1000))
    assert pp.phase == "maser" and pp.order_parameter < 1e-3


@pytest.mark.parametrize("k", [0, 1, 2])
def test_order_parameter_jumps_up(k):
    th = theta_maser_maser(1.0, NB, 0.0, k)
    lo = classify(MaserParams(a=1, n_b=NB, theta=th - 1e-3, N=1e6))
    hi = classify(MaserParams(a=1, n_b=NB, theta=th + 1e-3, N=1e6))
    assert (lo.branch, hi.branch) == (k, k + 1)
    assert hi.order_parameter - lo.order_parameter > 0.1


# -- slope --------------------------------------------------------------------------

def test_dxdtheta_finite_difference():
    rng = np.random.default_rng(11)
    for _ in range(10):
        a = rng.uniform(0.7, 1.0)
        k = int(rng.integers(0, 3))
        lo = tan_root(k) if k else 0.05
        phi = rng.uniform(lo + 0.05, (k + 1) * math.pi - 0.05)
        h = 1e-6
        fd = ((x_of_phi(phi + h, a, 0) - x_of_phi(phi - h, a, 0))
              / (theta_of_phi(phi + h, a) - theta_of_phi(phi - h, a)))
        assert dxdtheta(phi, a) == pytest.approx(fd, rel=1e-5)


def test_dxdtheta_diverges_at_branch_birth():
    assert abs(dxdtheta(tan_root(1) + 1e-10, 1.0)) > 1e6


def test_dxdtheta_vanishes_at_half():
    assert abs(dxdtheta(2.0, 0.5 + 1e-8)) < 1e-10


# -- thermal profile ------------------------------------------------------------------

def test_thermal_profile_equilibrium_flat():
    prof = thermal_mean_profile(NB / (1 + 2 * NB), NB, 0.3, np.linspace(0, 30, 61))
    assert np.allclose(prof.mean_n, NB, rtol=1e-12)


def test_thermal_profile_large_theta_limit():
    prof = thermal_mean_profile(0.2, NB, 0.0, [1e4])
    assert prof.mean_n[0] == pytest.approx(0.2 / 0.6, rel=1e-6)


def test_thermal_profile_dark_cavity():
    D = 0.4
    prof = thermal_mean_profile(0.6, 0.0, D, [k * math.pi / D for k in (1, 2, 3)])
    assert np.allclose(prof.mean_n, 0.0, atol=1e-14)


def test_thermal_profile_periodic_and_extrema():
    a, D = 0.55, 0.8
    th = np.linspace(0.1, 10, 50)
    p1 = thermal_mean_profile(a, NB, D, th)
    p2 = thermal_mean_profile(a, NB, D, th + math.pi / D)
    assert np.allclose(p1.mean_n, p2.mean_n, rtol=1e-9)
    mx, mn = thermal_extrema(a, NB, D)
    assert mx == pytest.approx((NB + a / D ** 2) / (1 + (1 - 2 * a) / D ** 2), rel=1e-12)
    assert mn == NB
    dense = thermal_mean_profile(a, NB, D, np.linspace(0.01, 2 * math.pi / D, 20001)).mean_n
    assert dense.max() == pytest.approx(mx, rel=1e-6)


def test_thermal_profile_flags_divergence():
    prof = thermal_mean_profile(1.0, NB, 0.0, [0.5, 1.5])
    assert list(prof.valid) == [True, False]


# -- order parameter versus a ------------------------------------------------------------

def _first_order_crossings(theta, k_max=6):
    out = []
    for k in range(k_max):
        f = lambda a: theta_maser_maser(a, NB, 0.0, k) - theta
        try:
            if f(0.999999) < 0:
                out.append(brentq(f, 0.52, 0.999999, xtol=1e-6))
        except NoCrossingError:
            pass
    return out


def test_order_vs_a_steps_match_crossings():
    ag = np.round(np.arange(0.5, 1.0 + 1e-9, 0.001), 6)
    x = order_parameter_vs_a(NB, 0.0, 25.0, 1000, ag, workers=4)
    steps = count_steps(ag, x)
    cross = _first_order_crossings(25.0)
    assert len(steps) == len(cross)
    assert np.allclose(steps, cross, atol=0.01)


def test_order_vs_a_monotone_and_thermal_floor():
    ag = np.round(np.arange(0.3, 1.0 + 1e-9, 0.01), 6)
    x = order_parameter_vs_a(NB, 0.0, 8.0, 400, ag)
    assert np.all(np.diff(x) >= -1e-9)
    below = ag < 0.5
    assert np.all(x[below] < 10 / 400)


# -- phase diagram ------------------------------------------------------------------

def test_phase_diagram_zero_detuning_lines():
    d = phase_diagram(NB, 0.0, a_grid=np.round(np.arange(0.56, 1.0 + 1e-9, 0.04), 6))
    kinds = {(b.kind, b.k) for b in d.boundaries}
    assert ("second_order_thermal_maser", 0) in kinds
    for k in range(4):
        assert ("first_order_maser_maser", k) in kinds
    for b in d.boundaries:
        pts = b.as_array()
        assert np.all(np.diff(pts[:, 1]) > 0)
        assert max(b.residuals) < 1e-8
        # Lines move to larger theta as a decreases toward 1/2.
        assert np.all(np.diff(pts[:, 0]) < 0)
    assert d.triple_points == []


def test_phase_diagram_detuned_lobes():
    d = phase_diagram(NB, 0.5, a_grid=np.round(np.arange(0.626, 0.7 + 1e-9, 0.002), 6),
                      with_triple_points=False)
    for b in d.boundaries:
        assert max(b.residuals) < 1e-8
    for k in (1, 2, 3):
        L = d.boundary("first_order_thermal_maser", k).as_array()
        R = d.boundary("second_order_maser_thermal", k).as_array()
        a0 = min(set(L[:, 1]) & set(R[:, 1]))
        mid = 0.5 * (L[L[:, 1] == a0, 0][0] + R[R[:, 1] == a0, 0][0])
        assert math.sin(0.5 * mid) ** 2 > 0.999


def test_phase_diagram_validity_family():
    d = phase_diagram(NB, 0.5, a_grid=[0.8, 0.9, 1.0], with_triple_points=False, theta_max=20)
    assert len(d.validity) >= 4
    for line in d.validity:
        for (th, a) in line.points:
            assert (2 * a - 1) * math.sin(0.5 * th) ** 2 / 0.25 == pytest.approx(1.0, abs=1e-12)
