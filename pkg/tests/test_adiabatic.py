import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from nhsta.adiabatic import (adiabatic_reference, adiabaticity_condition, adiabaticity_profile,
                             connection, gap_integral, geometric_phase, imaginary_gap,
                             imaginary_gap_profile)
from nhsta.dynamics import ExperimentSpec, IntegratorConfig, run_experiment
from nhsta.hamiltonians import HamiltonianModel, PulseParams, gaussian_chirped_model


def model(J=0j, **kw):
    return gaussian_chirped_model(PulseParams.reference(J=J, **kw))


def analytic_connection(m, t, branch):
    """<w|dv/dt> from the (Omega, Lambda)/S formulas with exact derivatives.

    Principal root only; valid where the path never crosses the branch cut.
    The smaller Lambda and its derivative come from Lambda+ Lambda- = -g Omega.
    """
    h, om, g, e, hd, omd, gd, ed = m.evaluate(t)
    d, dd = 0.5 * (e - h), 0.5 * (ed - hd)
    r = cmath.sqrt(d * d + g * om)
    rd = (2 * d * dd + gd * om + g * omd) / (2 * r)
    big_sgn = 1 if abs(d + r) >= abs(d - r) else -1
    lam_big, lam_big_d = d + big_sgn * r, dd + big_sgn * rd
    lam_small = -g * om / lam_big
    lam_small_d = -(gd * om + g * omd) / lam_big + g * om * lam_big_d / lam_big**2
    sgn = 1 if branch == "+" else -1
    lam, lam_d = (lam_big, lam_big_d) if sgn == big_sgn else (lam_small, lam_small_d)
    s2 = sgn * 2 * r * lam
    s2_d = sgn * 2 * (rd * lam + r * lam_d)
    s = cmath.sqrt(s2)
    s_d = s2_d / (2 * s)
    v = np.array([om, lam]) / s
    v_d = np.array([omd, lam_d]) / s - v * s_d / s
    w = np.array([g, lam]) / s
    return complex(w @ v_d)


def quad_phase(m, branch, t0, t1):
    re = quad(lambda t: analytic_connection(m, t, branch).real, t0, t1, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    im = quad(lambda t: analytic_connection(m, t, branch).imag, t0, t1, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return 1j * complex(re, im)


def test_connection_matches_analytic_derivative():
    m = model(0.05j)
    for t in np.linspace(-2.5, 2.5, 11):
        for branch in "+-":
            assert connection(m, t, branch) == pytest.approx(analytic_connection(m, t, branch), abs=1e-10)


def test_connection_vanishes_for_static_hamiltonian():
    vals = (0.1j, 0.3, 0.2, -0.4, 0j, 0j, 0j, 0j)
    m = HamiltonianModel(lambda t: vals)
    assert connection(m, 0.0, "+") == 0
    assert geometric_phase(m, "-", -1.0, 1.0) == 0


@pytest.mark.parametrize("J", [0j, 0.05j])
@pytest.mark.parametrize("branch", ["+", "-"])
def test_geometric_phase_against_quadrature_oracle(J, branch):
    m = model(J)
    got = geometric_phase(m, branch, -3.0, 0.7)
    ref = quad_phase(m, branch, -3.0, 0.7)
    assert abs(got - ref) < 1e-8


def test_geometric_phase_vanishes_for_real_symmetric_path():
    m = model(0j, omega_l=0.0, gamma1=0.0, gamma2=0.0)
    assert abs(geometric_phase(m, "+", -3.0, 3.0)) < 1e-10


def test_gauge_covariance():
    # v -> lam v, w -> w / lam shifts the phase by i ln(lam(t)/lam(t0))
    m = model(0.05j)
    lam = lambda t: cmath.exp((0.1 + 0.3j) * t)
    t0, t1 = -2.0, 1.0
    plain = geometric_phase(m, "+", t0, t1)
    gauged = geometric_phase(m, "+", t0, t1, gauge=lam)
    assert gauged - plain == pytest.approx(1j * (0.1 + 0.3j) * (t1 - t0), abs=1e-8)


def test_adiabatic_reference_reconstructs():
    m = model(0.05j)
    ref = adiabatic_reference(m, "+", -3.0, 0.5)
    np.testing.assert_allclose(ref.reconstruct(), ref.state, rtol=1e-14)
    assert adiabatic_reference(m, "+", 0.5, 0.5).geometric_phase == 0


def test_transitionless_evolution_equals_adiabatic_reference():
    # under H0 + H1 the state started in |E(t0)> is exactly the adiabatic reference
    m = model(0.05j)
    t0, t1 = -3.0, 1.0
    cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
    traj = run_experiment(ExperimentSpec(m, "exact", initial_branch="+", window=(t0, t1), cfg=cfg))
    ref = adiabatic_reference(m, "+", t0, t1)
    np.testing.assert_allclose(traj.final_state, ref.state, atol=1e-7)


def test_gap_integral_matches_trapezoid():
    m = model(0.05j)
    ts = np.linspace(-3, 1, 40001)
    gaps = np.array([imaginary_gap(m, t) for t in ts])
    ref = np.sum(0.5 * (gaps[1:] + gaps[:-1]) * np.diff(ts))
    assert gap_integral(m, -3.0, 1.0).imag == pytest.approx(ref, abs=1e-8)


@pytest.mark.parametrize("J", [0j, 0.005j, 0.05j])
def test_adiabaticity_forms_agree(J):
    m = model(J)
    for t in np.linspace(-2.5, 2.5, 11):
        met = adiabaticity_condition(m, t)
        assert met.condition_value == pytest.approx(met.closed_form_value, rel=1e-8)


def test_adiabaticity_profile_consistent_with_pointwise():
    m = model(0.05j)
    ts = np.linspace(-3, 0.5, 3501)
    prof = adiabaticity_profile(m, ts)
    point = adiabaticity_condition(m, 0.5)
    assert prof[-1].im_gap_integral == pytest.approx(point.im_gap_integral, abs=1e-6)
    assert prof[-1].condition_value == pytest.approx(point.condition_value, rel=1e-5)
    assert prof[0].exp_weight == 1.0


def test_imaginary_gap_profile_matches_pointwise():
    m = model(0.05j)
    ts = np.linspace(-3, 3, 61)
    prof = imaginary_gap_profile(m, ts)
    for t, g in zip(ts, prof):
        assert g == pytest.approx(imaginary_gap(m, t), abs=1e-15)


def test_hermitian_gap_is_real():
    m = model(0j, gamma1=0.0, gamma2=0.0)
    assert max(abs(g) for g in imaginary_gap_profile(m, np.linspace(-3, 3, 61))) < 1e-15


def test_bad_branch_label():
    with pytest.raises(ValueError):
        geometric_phase(model(), "x", 0, 1)
