"""Time evolution under non-Hermitian two-level Hamiltonians.

``i d|psi>/dt = H(t)|psi>`` is integrated with an embedded Runge-Kutta pair from
:func:`scipy.integrate.solve_ivp`. States are 2-vectors ``(a, b)`` on the bare
basis ``|1>, |2>``; populations are reported renormalized, with the raw norm
kept alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .counterterm import CounterTerm
from .errors import DegenerateSpectrum, ExceptionalPoint, StepSizeUnderflow, ZeroVector
from .hamiltonians import HamiltonianModel
from .linalg import eigendecompose

GROUND = np.array([1.0, 0.0], dtype=complex)
EXCITED = np.array([0.0, 1.0], dtype=complex)


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and sampling of one integration (times in ns)."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    init_step: float | None = None
    dense_output_every: float = 0.002
    method: str = "RK45"

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if not self.dense_output_every > 0:
            raise ValueError("dense_output_every must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


@dataclass
class Trajectory:
    """Sampled solution of one integration.

    ``states`` has shape ``(n, 2)``. ``p1 + p2 == 1`` at every sample;
    ``raw_norm`` is ``|a|^2 + |b|^2`` before renormalization.
    """

    times: np.ndarray
    states: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    raw_norm: np.ndarray
    inst_fidelity: np.ndarray | None = None
    n_evals: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_p1(self) -> float:
        return float(self.p1[-1])


def sample_times(t0, t1, every) -> np.ndarray:
    """Uniform grid from ``t0`` to ``t1`` inclusive with spacing close to ``every``."""
    n = max(1, int(round(abs(t1 - t0) / every)))
    return np.linspace(t0, t1, n + 1)


def populations(states):
    """Renormalized ``(p1, p2)`` and the raw norm of an ``(n, 2)`` state array."""
    sq = np.abs(np.asarray(states)) ** 2
    norm = sq.sum(axis=1)
    p1 = sq[:, 0] / norm
    return p1, 1.0 - p1, norm


def integrate(H, psi0, t0, t1, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate ``i psi' = H(t) psi`` from ``t0`` to ``t1``.

    Parameters
    ----------
    H : callable
        ``t -> (2, 2)`` complex array.
    psi0 : array_like
        Initial amplitudes ``(a, b)``.

    Raises
    ------
    StepSizeUnderflow
        If the solver cannot continue (step size collapses).
    ExceptionalPoint
        Propagated unchanged from ``H`` with the time of failure.
    """
    cfg = cfg or IntegratorConfig()
    psi0 = np.asarray(psi0, dtype=complex).reshape(2)
    if not np.all(np.isfinite(psi0)):
        raise ValueError("initial state must be finite")
    times = sample_times(t0, t1, cfg.dense_output_every)

    def rhs(t, y):
        return -1j * (H(t) @ y)

    kwargs = {"max_step": cfg.max_step}
    if cfg.init_step is not None:
        kwargs["first_step"] = cfg.init_step
    sol = solve_ivp(rhs, (t0, t1), psi0, method=cfg.method, t_eval=times,
                    rtol=cfg.rel_tol, atol=cfg.abs_tol, **kwargs)
    if sol.status != 0:
        raise StepSizeUnderflow(f"integration stopped at t={sol.t[-1]!r} ns: {sol.message}")
    states = sol.y.T.copy()
    p1, p2, norm = populations(states)
    return Trajectory(times=sol.t, states=states, p1=p1, p2=p2, raw_norm=norm, n_evals=sol.nfev)


def fidelity(psi, target) -> float:
    """Normalized overlap ``|<target|psi>|^2 / (|target|^2 |psi|^2)``."""
    psi = np.asarray(psi, dtype=complex)
    target = np.asarray(target, dtype=complex)
    n_psi = np.vdot(psi, psi).real
    n_target = np.vdot(target, target).real
    if n_psi == 0 or n_target == 0:
        raise ZeroVector("fidelity needs two nonzero vectors")
    value = abs(np.vdot(target, psi)) ** 2 / (n_psi * n_target)
    return float(min(1.0, value))


def _decompose(model, t, hint):
    try:
        return eigendecompose(model.matrix(t), hint)
    except DegenerateSpectrum as exc:
        raise ExceptionalPoint(t, 0.0, f"exceptional point at t={t!r} ns: {exc}") from exc


def occupied_branch(model: HamiltonianModel, psi0, t0) -> str:
    """Branch whose right eigenvector overlaps most with ``psi0`` at ``t0``."""
    es = _decompose(model, t0, None)
    f_plus = fidelity(psi0, es.v_plus)
    f_minus = fidelity(psi0, es.v_minus)
    return "+" if f_plus >= f_minus else "-"


def eigenstate_fidelity(model: HamiltonianModel, times, states, branch) -> np.ndarray:
    """Fidelity of each state with the continued eigenvector of ``branch``."""
    out = np.empty(len(times))
    hint = None
    for i, t in enumerate(times):
        hint = _decompose(model, t, hint)
        out[i] = fidelity(states[i], hint.right(branch))
    return out


@dataclass(frozen=True)
class ExperimentSpec:
    """One controlled run: ``H(t) = H0(t) + H1(t)``.

    ``counterterm_source`` is the model the counterterm is designed for; it
    defaults to ``model`` and differs when, say, an RWA-designed term is applied
    to the full Hamiltonian. Instantaneous fidelities always refer to the
    eigenstates of ``model``. Setting ``initial_branch`` to ``"+"`` or ``"-"``
    replaces ``psi0`` by that right eigenvector of ``model`` at the window start.
    """

    model: HamiltonianModel
    counterterm_kind: str = "exact"
    counterterm_source: HamiltonianModel | None = None
    order: int = 0
    suppress_real_offdiag: bool = False
    check: bool = True
    psi0: tuple = (0j, 1 + 0j)
    initial_branch: str | None = None
    window: tuple | None = None
    cfg: IntegratorConfig = IntegratorConfig()
    track_fidelity: bool = True

    def counterterm(self) -> CounterTerm:
        source = self.counterterm_source if self.counterterm_source is not None else self.model
        return CounterTerm(self.counterterm_kind, source if self.counterterm_kind != "zero" else None,
                           order=self.order, suppress_real_offdiag=self.suppress_real_offdiag,
                           check=self.check)

    def hamiltonian(self):
        """Composite ``t -> H0(t) + H1(t)``."""
        model = self.model
        if self.counterterm_kind == "zero":
            return model.matrix
        h1 = self.counterterm().entries

        def H(t):
            h, om, g, e = model.evaluate(t)[:4]
            m11, m12, m21, m22 = h1(t)
            return np.array([[h + m11, om + m12], [g + m21, e + m22]], dtype=complex)
        return H

    @property
    def t_window(self) -> tuple:
        return tuple(self.window) if self.window is not None else tuple(self.model.window)

    def with_(self, **changes) -> "ExperimentSpec":
        return replace(self, **changes)


def run_experiment(spec: ExperimentSpec) -> Trajectory:
    """Integrate the composed Hamiltonian and attach eigenstate fidelities."""
    t0, t1 = spec.t_window
    if spec.initial_branch is not None:
        branch = spec.initial_branch
        psi0 = _decompose(spec.model, t0, None).right(branch)
    else:
        psi0 = np.asarray(spec.psi0, dtype=complex)
        branch = occupied_branch(spec.model, psi0, t0)
    traj = integrate(spec.hamiltonian(), psi0, t0, t1, spec.cfg)
    if spec.track_fidelity:
        traj.inst_fidelity = eigenstate_fidelity(spec.model, traj.times, traj.states, branch)
        traj.meta["branch"] = branch
    traj.meta.update(counterterm=spec.counterterm_kind, model=spec.model.label, window=(t0, t1))
    return traj
