import cmath
import math

import numpy as np
import pytest

from nhsta.errors import DerivativeMismatch
from nhsta.hamiltonians import (TWO_PI, AtomLightParams, PulseParams, Scatterer,
                                WhisperingGalleryParams, atom_light_model, build_preset,
                                derivative_errors, gaussian_chirped_model, general_model,
                                rwa_model, whispering_gallery_matrix)

RNG_TIMES = np.random.default_rng(5).uniform(-3, 3, size=100)


def test_quoted_unit_conversion():
    p = PulseParams.reference()
    assert p.omega0 == pytest.approx(2 * math.pi * 0.01)
    assert p.chirp_x == pytest.approx((2 * math.pi) ** 2 * 0.3)
    assert p.chirp_y == pytest.approx((2 * math.pi) ** 2 * 0.005)
    assert p.gamma1 == pytest.approx(2 * math.pi * 1e-4)
    assert p.gamma2 == pytest.approx(2 * math.pi * 3e-3)
    assert p.omega_l == pytest.approx(0.005 * math.pi)


def test_pulse_validation():
    with pytest.raises(ValueError):
        PulseParams(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        PulseParams(1.0, 1.0, 1.0, gamma2=-0.1)


def test_pulse_shapes_peak_and_slope():
    p = PulseParams.reference()
    assert p.rabi(0.0) == pytest.approx(TWO_PI * 0.01)
    assert p.detuning(1.0) - p.detuning(0.0) == pytest.approx(-2 * TWO_PI**2 * 0.005)
    # Gaussian width: Omega_R drops to 1/e at t = 1/sqrt(x)
    t_e = 1 / math.sqrt(p.chirp_x)
    assert p.rabi(t_e) == pytest.approx(p.rabi(0.0) / math.e)


@pytest.mark.parametrize("J", [0j, 0.005j, 0.05j])
def test_gaussian_peak_and_offset(J):
    p = PulseParams.reference(J=J, gamma1=0.0, gamma2=0.0)
    h, om, g, e = gaussian_chirped_model(p).elements(0.0)
    assert om == pytest.approx(p.omega0 + J, abs=1e-15)
    assert g == pytest.approx(p.omega0 + J, abs=1e-15)
    assert h == 0 and e == 0


def test_offset_cancels_in_difference():
    base = gaussian_chirped_model(PulseParams.reference())
    shifted = gaussian_chirped_model(PulseParams.reference(J=0.05j))
    p = PulseParams.reference()
    for t in RNG_TIMES[:20]:
        _, om, g, _ = shifted.elements(t)
        expected = 0.5 * p.rabi(t) * (cmath.exp(-2j * p.omega_l * t) - cmath.exp(2j * p.omega_l * t))
        assert om - g == pytest.approx(expected, abs=1e-15)
        _, om0, g0, _ = base.elements(t)
        assert om0 - g0 == pytest.approx(om - g, abs=1e-15)


def test_counter_rotating_terms():
    p = PulseParams.reference(J=0.05j)
    full, rwa = gaussian_chirped_model(p), rwa_model(p)
    for t in RNG_TIMES[:20]:
        _, om_f, g_f, _ = full.elements(t)
        _, om_r, g_r, _ = rwa.elements(t)
        assert om_f - om_r == pytest.approx(0.5 * p.rabi(t) * cmath.exp(-2j * p.omega_l * t), abs=1e-15)
        assert g_f - g_r == pytest.approx(0.5 * p.rabi(t) * cmath.exp(2j * p.omega_l * t), abs=1e-15)


def test_rwa_independent_of_drive_frequency():
    a = rwa_model(PulseParams.reference(omega_l=0.0))
    b = rwa_model(PulseParams.reference())
    for t in RNG_TIMES[:20]:
        assert a.evaluate(t) == b.evaluate(t)


def test_rwa_real_offset_is_hermitian_block():
    m = rwa_model(PulseParams.reference(J=0.02 + 0j))
    for t in RNG_TIMES[:20]:
        _, om, g, _ = m.elements(t)
        assert om == g and om == om.conjugate()


def test_gaussian_hermitian_limit_is_real_symmetric():
    p = PulseParams.reference(omega_l=0.0, gamma1=0.0, gamma2=0.0)
    m = gaussian_chirped_model(p)
    for t in RNG_TIMES:
        H = m.matrix(t)
        assert np.all(H.imag == 0) and H[0, 1] == H[1, 0]


def test_atom_light_structure():
    p = PulseParams.reference()
    m = atom_light_model(AtomLightParams(p))
    for t in RNG_TIMES[:30]:
        _, om, g, _ = m.elements(t)
        wl = p.omega_l
        assert om == pytest.approx(0.5j * p.rabi(t) * cmath.exp(-1j * wl * t) * cmath.exp(2j), abs=1e-15)
        assert g == pytest.approx(0.5j * p.rabi(t) * cmath.exp(1j * wl * t) * cmath.exp(2j), abs=1e-15)
        assert abs(om) == pytest.approx(abs(g), rel=1e-14)
        assert abs(om - g.conjugate()) > 1e-6 * abs(om)


def test_atom_light_hermitian_when_phases_vanish():
    p = PulseParams.reference(gamma1=0.0, gamma2=0.0)
    m = atom_light_model(AtomLightParams(p, 0.0, 0.0))
    for t in RNG_TIMES[:30]:
        H = m.matrix(t)
        np.testing.assert_allclose(H, H.conj().T, atol=1e-16)


@pytest.mark.parametrize("preset", ["gaussian", "rwa", "atomlight"])
@pytest.mark.parametrize("J", [0j, 0.05j])
def test_preset_derivatives(preset, J):
    model = build_preset(preset, PulseParams.reference(J=J))
    errs = derivative_errors(model.evaluate, model.window)
    assert np.all(errs < 1e-6)


def test_time_dependent_rates_differentiate():
    p = PulseParams.reference(gamma2=lambda t: 0.02 * (1 + 0.5 * math.tanh(t)))
    model = gaussian_chirped_model(p)
    assert np.all(derivative_errors(model.evaluate, model.window) < 1e-6)


def test_general_constant():
    m = general_model((lambda t: 0, lambda t: 1, lambda t: 1, lambda t: 0))
    for t in (-1.0, 0.0, 2.5):
        np.testing.assert_array_equal(m.matrix(t), [[0, 1], [1, 0]])
        assert np.all(np.abs(m.derivatives(t)) == 0)
    assert m.deriv_mode == "finite_difference"


def test_general_wrong_derivative_rejected():
    fns = (lambda t: 0, lambda t: math.sin(t), lambda t: 1, lambda t: 0)
    bad = (lambda t: 0, lambda t: math.sin(t), lambda t: 0, lambda t: 0)
    with pytest.raises(DerivativeMismatch):
        general_model(fns, bad)
    good = (lambda t: 0, lambda t: math.cos(t), lambda t: 0, lambda t: 0)
    assert general_model(fns, good).deriv_mode == "analytic"


def test_general_wraps_gaussian():
    ref = gaussian_chirped_model(PulseParams.reference(J=0.05j))
    fns = tuple((lambda t, i=i: ref.evaluate(t)[i]) for i in range(4))
    derivs = tuple((lambda t, i=i: ref.evaluate(t)[4 + i]) for i in range(4))
    wrapped = general_model(fns, derivs)
    for t in RNG_TIMES:
        np.testing.assert_allclose(wrapped.evaluate(t), ref.evaluate(t), rtol=0, atol=1e-12)
    fd = general_model(fns)
    for t in RNG_TIMES[:20]:
        np.testing.assert_allclose(fd.derivatives(t), ref.derivatives(t), atol=1e-7)


def test_whispering_gallery_no_scatterers():
    H = whispering_gallery_matrix(WhisperingGalleryParams(1.5 - 0.01j))
    np.testing.assert_array_equal(H, (1.5 - 0.01j) * np.eye(2))


def test_whispering_gallery_single_scatterer_symmetric():
    s = Scatterer(0.3 - 0.01j, 0.1 + 0.02j, 0.0)
    H = whispering_gallery_matrix(WhisperingGalleryParams(1.0, (s,), azimuthal_m=3))
    assert H[0, 1] == H[1, 0] == s.V - s.U


def _wgm_direct(omega0, scatterers, m):
    """Oracle: the two-mode model as a sum of per-scatterer rank-structured matrices."""
    H = omega0 * np.eye(2, dtype=complex)
    for s in scatterers:
        phase = np.exp(-2j * m * s.beta)
        H += np.array([[s.V + s.U, (s.V - s.U) * phase],
                       [(s.V - s.U) / phase, s.V + s.U]])
    return H


def test_whispering_gallery_against_direct_sum():
    rng = np.random.default_rng(9)
    for _ in range(20):
        sc = tuple(Scatterer(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)),
                             rng.uniform(0, 2 * math.pi)) for _ in range(2))
        m = int(rng.integers(1, 8))
        H = whispering_gallery_matrix(WhisperingGalleryParams(2.0 - 0.1j, sc, m))
        np.testing.assert_allclose(H, _wgm_direct(2.0 - 0.1j, sc, m), atol=1e-13)
        assert H[0, 0] == H[1, 1]
        assert abs(abs(H[0, 1]) - abs(H[1, 0])) > 1e-6


def test_whispering_gallery_rejects_bad_mode():
    with pytest.raises(ValueError):
        WhisperingGalleryParams(1.0, (), azimuthal_m=0)


def test_unknown_preset():
    with pytest.raises(ValueError):
        build_preset("nope", PulseParams.reference())


def test_with_window():
    m = gaussian_chirped_model(PulseParams.reference()).with_window((-2, 2))
    assert m.window == (-2, 2)
