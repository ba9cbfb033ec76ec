import numpy as np
import pytest

from nhsta.counterterm import exact_counterterm
from nhsta.dynamics import (EXCITED, GROUND, ExperimentSpec, IntegratorConfig, fidelity, integrate,
                            occupied_branch, populations, run_experiment, sample_times)
from nhsta.errors import ExceptionalPoint, StepSizeUnderflow, ZeroVector
from nhsta.hamiltonians import (AtomLightParams, PulseParams, atom_light_model,
                                gaussian_chirped_model, general_model, rwa_model)

FAST = IntegratorConfig(dense_output_every=0.01)


def const(H):
    H = np.asarray(H, dtype=complex)
    return lambda t: H


def test_zero_hamiltonian_is_identity():
    psi0 = np.array([0.6, 0.8j])
    traj = integrate(const(np.zeros((2, 2))), psi0, 0.0, 2.0, FAST)
    assert np.abs(traj.states - psi0).max() == 0


def test_pure_loss_closed_form():
    gamma2 = 0.3
    H = np.diag([0, -0.5j * gamma2])
    psi0 = np.array([0.0, 1.0])
    traj = integrate(const(H), psi0, 0.0, 4.0, FAST)
    np.testing.assert_allclose(np.abs(traj.states[:, 1]) ** 2, np.exp(-gamma2 * traj.times), rtol=1e-9)
    np.testing.assert_allclose(traj.p2, 1.0, atol=1e-15)
    np.testing.assert_allclose(traj.raw_norm, np.exp(-gamma2 * traj.times), rtol=1e-9)


def test_rabi_oscillation_closed_form():
    w = 1.3
    traj = integrate(const([[0, w], [w, 0]]), EXCITED, 0.0, 5.0, FAST)
    np.testing.assert_allclose(traj.p2, np.cos(w * traj.times) ** 2, atol=1e-8)
    np.testing.assert_allclose(traj.raw_norm, 1.0, atol=1e-8)


def test_populations_normalized():
    p = PulseParams.reference(J=0.05j)
    traj = run_experiment(ExperimentSpec(gaussian_chirped_model(p), "zero", cfg=FAST))
    np.testing.assert_allclose(traj.p1 + traj.p2, 1.0, atol=1e-12)
    assert np.all((traj.p1 >= 0) & (traj.p1 <= 1))
    assert np.all(np.diff(traj.times) > 0)
    assert np.all(traj.raw_norm > 0)


def test_hermitian_norm_conserved():
    p = PulseParams.reference(gamma1=0.0, gamma2=0.0)
    m = gaussian_chirped_model(p)
    traj = run_experiment(ExperimentSpec(m, "exact", cfg=FAST))
    np.testing.assert_allclose(traj.raw_norm, 1.0, atol=1e-8)


def test_linearity():
    m = gaussian_chirped_model(PulseParams.reference(J=0.05j))
    H = ExperimentSpec(m, "exact").hamiltonian()
    psi0 = np.array([0.3 - 0.1j, 0.9 + 0.2j])
    alpha = 2.5 * np.exp(0.7j)
    cfg = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, dense_output_every=0.01)
    a = integrate(H, psi0, -3, 3, cfg)
    b = integrate(H, alpha * psi0, -3, 3, cfg)
    np.testing.assert_allclose(b.final_state, alpha * a.final_state, rtol=1e-10, atol=1e-10 * abs(alpha))


def test_time_reversal():
    m = gaussian_chirped_model(PulseParams.reference(J=0.005j))
    H = ExperimentSpec(m, "exact").hamiltonian()
    cfg = IntegratorConfig(dense_output_every=0.01)
    fwd = integrate(H, EXCITED, -3, 3, cfg)
    back = integrate(H, fwd.final_state, 3, -3, cfg)
    # accumulated tolerance ~ rel_tol times the number of steps
    assert np.abs(back.final_state - EXCITED).max() < 10 * cfg.rel_tol * 1e3
    assert back.times[0] == 3 and back.times[-1] == -3


def test_self_convergence():
    m = gaussian_chirped_model(PulseParams.reference(J=0.05j))
    H = ExperimentSpec(m, "exact").hamiltonian()
    ref = integrate(H, EXCITED, -3, 3, IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15, method="DOP853"))
    coarse = integrate(H, EXCITED, -3, 3, IntegratorConfig(rel_tol=1e-9, abs_tol=1e-11))
    fine = integrate(H, EXCITED, -3, 3, IntegratorConfig(rel_tol=5e-10, abs_tol=5e-12))
    change = np.abs(fine.final_state - coarse.final_state).max()
    # estimated local-error sum: tolerance times accepted steps
    n_steps = coarse.n_evals / 6
    assert change < 10 * 1e-9 * n_steps
    assert np.abs(fine.final_state - ref.final_state).max() <= np.abs(coarse.final_state - ref.final_state).max() * 1.5


def test_sample_times():
    ts = sample_times(-3, 3, 0.002)
    assert len(ts) == 3001 and ts[0] == -3 and ts[-1] == 3
    assert len(sample_times(0, 1e-5, 0.002)) == 2


def test_populations_helper():
    p1, p2, norm = populations(np.array([[3, 4j]]))
    assert p1[0] == pytest.approx(9 / 25) and p2[0] == pytest.approx(16 / 25) and norm[0] == 25


def test_fidelity_properties():
    rng = np.random.default_rng(2)
    for _ in range(100):
        psi = rng.normal(size=2) + 1j * rng.normal(size=2)
        tgt = rng.normal(size=2) + 1j * rng.normal(size=2)
        f = fidelity(psi, tgt)
        assert 0 <= f <= 1
        assert fidelity(psi, psi) == pytest.approx(1.0, abs=1e-15)
        scale = complex(*rng.normal(size=2))
        assert fidelity(scale * psi, tgt) == pytest.approx(f, rel=1e-12)
        assert fidelity(psi, scale * tgt) == pytest.approx(f, rel=1e-12)
    assert fidelity(GROUND, EXCITED) == 0
    with pytest.raises(ZeroVector):
        fidelity([0, 0], GROUND)
    with pytest.raises(ZeroVector):
        fidelity(GROUND, [0, 0])


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0)
    with pytest.raises(ValueError):
        IntegratorConfig(dense_output_every=-1)


def test_exceptional_point_propagates_with_time():
    # C1 = t^2 - 1 vanishes at t = 1 (g = t^2 - 1, Omega = 1, h = e = 0)
    m = general_model((lambda t: 0, lambda t: 1, lambda t: t * t - 1, lambda t: 0),
                      (lambda t: 0, lambda t: 0, lambda t: 2 * t, lambda t: 0))

    def H(t):
        if abs(t - 1.0) < 1e-3:
            # step onto the singular point exactly
            return m.matrix(1.0) + exact_counterterm(m, 1.0)
        return m.matrix(t) + exact_counterterm(m, t)

    with pytest.raises(ExceptionalPoint) as info:
        integrate(H, EXCITED, 0.5, 1.5, FAST)
    assert info.value.t == 1.0


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_step_size_underflow():
    # gain ~ 1/|1 - t| drives |a| to a finite-time singularity at t = 1
    H = lambda t: np.array([[1j / abs(1.0 - t), 0], [0, 0]])
    with pytest.raises(StepSizeUnderflow):
        integrate(H, GROUND, 0.0, 2.0, IntegratorConfig(dense_output_every=0.1))


def test_occupied_branch_and_start_on_branch():
    m = gaussian_chirped_model(PulseParams.reference())
    b = occupied_branch(m, EXCITED, -3.0)
    traj = run_experiment(ExperimentSpec(m, "exact", initial_branch=b, cfg=FAST))
    assert traj.meta["branch"] == b
    assert traj.inst_fidelity[0] == pytest.approx(1.0, abs=1e-14)


def _presets(J):
    p = PulseParams.reference(J=J)
    return {
        "gaussian": gaussian_chirped_model(p),
        "rwa": rwa_model(p),
        "atomlight": atom_light_model(AtomLightParams(p)),
    }


@pytest.mark.parametrize("J", [0j, 0.005j, 0.05j])
@pytest.mark.parametrize("name", ["gaussian", "rwa", "atomlight"])
def test_transitionless_property(J, name):
    m = _presets(J)[name]
    b = occupied_branch(m, EXCITED, -3.0)
    sta = run_experiment(ExperimentSpec(m, "exact", initial_branch=b, cfg=FAST))
    bare = run_experiment(ExperimentSpec(m, "zero", initial_branch=b, cfg=FAST))
    assert sta.inst_fidelity.min() >= 0.999
    assert bare.inst_fidelity.min() < 0.95


def test_rwa_designed_counterterm_on_full_hamiltonian():
    p = PulseParams.reference(J=0.05j)
    spec = ExperimentSpec(gaussian_chirped_model(p), "exact", counterterm_source=rwa_model(p), cfg=FAST)
    traj = run_experiment(spec)
    assert np.all(np.isfinite(traj.states))
    # designed for a different Hamiltonian, so not exact along this one
    exact = run_experiment(spec.with_(counterterm_source=None))
    assert traj.inst_fidelity.min() < exact.inst_fidelity.min()
