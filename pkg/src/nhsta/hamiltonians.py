"""Time-dependent two-level Hamiltonians ``H0(t) = [[h, Omega], [g, e]]``.

All frequencies are angular, in rad/ns, with hbar = 1. The ``from_quoted_units``
constructors accept the customary "2 pi x f GHz" numbers and convert them once.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DerivativeMismatch

TWO_PI = 2.0 * math.pi

# Gaussian centred at t = 0; t_f = 6 ns
DEFAULT_WINDOW = (-3.0, 3.0)

FD_STEP = 1e-4
DERIV_RTOL = 1e-6
DERIV_SAMPLES = 100


def central_difference(fn, t, step=FD_STEP):
    return (fn(t + step) - fn(t - step)) / (2.0 * step)


def _rate(gamma):
    """Return ``(value_fn, derivative_fn)`` for a constant or time-dependent rate."""
    if callable(gamma):
        return gamma, lambda t: central_difference(gamma, t)
    value = float(gamma)
    return (lambda t: value), (lambda t: 0.0)


@dataclass(frozen=True)
class PulseParams:
    """Linearly chirped Gaussian pulse with gain/loss, all in rad/ns.

    ``Omega_R(t) = omega0 * exp(-chirp_x t^2)`` and ``Delta(t) = -2 chirp_y t``.
    ``gamma1`` (gain of level 1) and ``gamma2`` (loss of level 2) are constants or
    callables of t. ``J`` is the constant complex off-diagonal offset.
    """

    omega0: float
    chirp_x: float
    chirp_y: float
    omega_l: float = 0.0
    gamma1: float | Callable[[float], float] = 0.0
    gamma2: float | Callable[[float], float] = 0.0
    J: complex = 0j

    def __post_init__(self):
        if not self.chirp_x > 0:
            raise ValueError(f"chirp_x must be positive, got {self.chirp_x!r}")
        for name in ("gamma1", "gamma2"):
            value = getattr(self, name)
            if not callable(value) and value < 0:
                raise ValueError(f"{name} must be non-negative, got {value!r}")
        object.__setattr__(self, "J", complex(self.J))

    @classmethod
    def from_quoted_units(cls, omega0_ghz, x_ghz2, y_ghz2, omegaL_ghz=0.0,
                         gamma1_mhz=0.0, gamma2_mhz=0.0, J=0j):
        """Build from numbers quoted as ``2 pi x f`` (GHz, GHz^2, MHz).

        ``J`` is taken as an angular frequency in rad/ns, unscaled.
        """
        return cls(
            omega0=TWO_PI * omega0_ghz,
            chirp_x=TWO_PI**2 * x_ghz2,
            chirp_y=TWO_PI**2 * y_ghz2,
            omega_l=TWO_PI * omegaL_ghz,
            gamma1=TWO_PI * 1e-3 * gamma1_mhz,
            gamma2=TWO_PI * 1e-3 * gamma2_mhz,
            J=complex(J),
        )

    @classmethod
    def reference(cls, J=0j, **overrides):
        """Reference parameter set of the chirped-Gaussian examples.

        Omega0 = 2pi x 0.01 GHz, x = (2pi)^2 x 0.3 GHz^2, y = (2pi)^2 x 0.005 GHz^2,
        omega_L = 0.005 pi rad/ns, gamma1 = 2pi x 0.1 MHz, gamma2 = 2pi x 3 MHz.
        """
        p = cls.from_quoted_units(0.01, 0.3, 0.005, omegaL_ghz=0.0025,
                                 gamma1_mhz=0.1, gamma2_mhz=3.0, J=J)
        return replace(p, **overrides) if overrides else p

    def rabi(self, t):
        return self.omega0 * math.exp(-self.chirp_x * t * t)

    def detuning(self, t):
        return -2.0 * self.chirp_y * t


@dataclass(frozen=True)
class AtomLightParams:
    pulse: PulseParams
    theta1: float = 2.0 + 0.5 * math.pi
    theta2: float = 2.0 + 0.5 * math.pi


@dataclass(frozen=True)
class Scatterer:
    V: complex
    U: complex
    beta: float


@dataclass(frozen=True)
class WhisperingGalleryParams:
    omega_unperturbed: complex
    scatterers: Sequence[Scatterer] = ()
    azimuthal_m: int = 1

    def __post_init__(self):
        if int(self.azimuthal_m) != self.azimuthal_m or self.azimuthal_m <= 0:
            raise ValueError("azimuthal_m must be a positive integer")


@dataclass(frozen=True)
class HamiltonianModel:
    """Element functions of ``H0(t)`` together with their time derivatives.

    ``evaluate(t)`` returns the eight numbers ``(h, Omega, g, e, hdot, Omegadot,
    gdot, edot)``. Presets fuse both into one call; for a model built from
    element callables alone the derivatives come from central differences.

    ``k_split`` (optional) returns ``(K, Kdot)`` for the decomposition
    ``Omega = K + J``, ``g = conj(K) + J`` with constant ``J``.
    """

    evaluate: Callable[[float], tuple]
    deriv_mode: str = "analytic"
    fd_step: float = FD_STEP
    label: str = "general"
    params: object = None
    k_split: Callable[[float], tuple] | None = None
    J: complex | None = None
    window: tuple = DEFAULT_WINDOW

    def elements(self, t):
        return self.evaluate(t)[:4]

    def derivatives(self, t):
        return self.evaluate(t)[4:]

    def matrix(self, t) -> np.ndarray:
        h, om, g, e = self.evaluate(t)[:4]
        return np.array([[h, om], [g, e]], dtype=complex)

    def matrix_dot(self, t) -> np.ndarray:
        hd, omd, gd, ed = self.evaluate(t)[4:]
        return np.array([[hd, omd], [gd, ed]], dtype=complex)

    def with_window(self, window):
        return replace(self, window=tuple(window))


def derivative_errors(evaluate, window=DEFAULT_WINDOW, n=DERIV_SAMPLES, step=FD_STEP, seed=0):
    """Max-norm relative error of analytic vs central-difference derivatives.

    Returns one value per element (h, Omega, g, e), computed as
    ``max_t |analytic - fd| / max_t |analytic|`` over ``n`` random times.
    """
    rng = np.random.default_rng(seed)
    lo, hi = window
    times = rng.uniform(lo + 2 * step, hi - 2 * step, size=n)
    analytic = np.empty((n, 4), dtype=complex)
    numeric = np.empty((n, 4), dtype=complex)
    for i, t in enumerate(times):
        analytic[i] = evaluate(t)[4:]
        up = np.asarray(evaluate(t + step)[:4], dtype=complex)
        down = np.asarray(evaluate(t - step)[:4], dtype=complex)
        numeric[i] = (up - down) / (2 * step)
    diff = np.abs(analytic - numeric).max(axis=0)
    scale = np.abs(analytic).max(axis=0)
    # identically-zero derivatives: compare against roundoff of the values instead
    floor = 1e-12 * (1.0 + np.abs(numeric).max(axis=0))
    return diff / np.maximum(scale, floor)


def general_model(fns, derivs=None, *, fd_step=FD_STEP, label="general",
                  window=DEFAULT_WINDOW, check=True):
    """Model from four element callables ``(h, Omega, g, e)``.

    ``derivs`` is a matching 4-tuple of derivative callables. When omitted the
    model differentiates numerically with a central step ``fd_step``. Supplied
    derivatives are cross-checked against central differences at 100 random
    times and :class:`DerivativeMismatch` is raised above relative 1e-6.
    """
    fns = tuple(fns)
    if len(fns) != 4:
        raise ValueError("expected four element functions (h, Omega, g, e)")

    if derivs is None:
        def evaluate(t):
            vals = tuple(complex(f(t)) for f in fns)
            ders = tuple(complex((f(t + fd_step) - f(t - fd_step)) / (2 * fd_step)) for f in fns)
            return vals + ders
        return HamiltonianModel(evaluate, deriv_mode="finite_difference", fd_step=fd_step,
                                label=label, window=tuple(window))

    derivs = tuple(derivs)
    if len(derivs) != 4:
        raise ValueError("expected four derivative functions")

    def evaluate(t):
        return tuple(complex(f(t)) for f in fns) + tuple(complex(f(t)) for f in derivs)

    if check:
        errs = derivative_errors(evaluate, window)
        bad = [name for name, err in zip(("h", "Omega", "g", "e"), errs) if err > DERIV_RTOL]
        if bad:
            detail = ", ".join(f"{n}: {err:.2e}" for n, err in zip(("h", "Omega", "g", "e"), errs))
            raise DerivativeMismatch(f"analytic derivatives disagree for {bad} ({detail})")
    return HamiltonianModel(evaluate, label=label, window=tuple(window))


def _diagonal(p: PulseParams):
    g1, g1d = _rate(p.gamma1)
    g2, g2d = _rate(p.gamma2)
    y2 = 2.0 * p.chirp_y

    def diag(t):
        delta = -y2 * t
        h = 0.5 * complex(-delta, g1(t))
        e = 0.5 * complex(delta, -g2(t))
        hd = 0.5 * complex(y2, g1d(t))
        ed = 0.5 * complex(-y2, -g2d(t))
        return h, e, hd, ed

    return diag


def gaussian_chirped_model(p: PulseParams, window=DEFAULT_WINDOW) -> HamiltonianModel:
    """Chirped Gaussian drive beyond the rotating-wave approximation.

    ``Omega = Omega_R (1 + exp(-2i wL t))/2 + J`` and
    ``g = Omega_R (1 + exp(+2i wL t))/2 + J``.
    """
    diag = _diagonal(p)
    om0, x, wl, J = p.omega0, p.chirp_x, p.omega_l, p.J

    def k_split(t):
        rabi = om0 * math.exp(-x * t * t)
        rabi_d = -2.0 * x * t * rabi
        em = cmath.exp(-2j * wl * t)
        K = 0.5 * rabi * (1.0 + em)
        Kd = 0.5 * rabi_d * (1.0 + em) - 1j * wl * rabi * em
        return K, Kd

    def evaluate(t):
        h, e, hd, ed = diag(t)
        K, Kd = k_split(t)
        return (h, K + J, K.conjugate() + J, e, hd, Kd, Kd.conjugate(), ed)

    return HamiltonianModel(evaluate, label="gaussian", params=p, k_split=k_split, J=J,
                            window=tuple(window))


def rwa_model(p: PulseParams, window=DEFAULT_WINDOW) -> HamiltonianModel:
    """Rotating-wave reduction: both off-diagonals ``Omega_R/2 + J``."""
    diag = _diagonal(p)
    om0, x, J = p.omega0, p.chirp_x, p.J

    def k_split(t):
        rabi = om0 * math.exp(-x * t * t)
        return complex(0.5 * rabi), complex(-x * t * rabi)

    def evaluate(t):
        h, e, hd, ed = diag(t)
        K, Kd = k_split(t)
        return (h, K + J, K + J, e, hd, Kd, Kd, ed)

    return HamiltonianModel(evaluate, label="rwa", params=p, k_split=k_split, J=J,
                            window=tuple(window))


def atom_light_model(p: AtomLightParams, window=DEFAULT_WINDOW) -> HamiltonianModel:
    """Atom-light coupling with phases ``theta1``, ``theta2`` on the off-diagonals.

    ``Omega = Omega_R exp(-i wL t)`` enters as ``(Omega e^{i theta1}, conj(Omega) e^{i theta2})/2``;
    a nonzero ``pulse.J`` is added to both off-diagonals.
    """
    pulse = p.pulse
    diag = _diagonal(pulse)
    om0, x, wl, J = pulse.omega0, pulse.chirp_x, pulse.omega_l, pulse.J
    ph1 = cmath.exp(1j * p.theta1)
    ph2 = cmath.exp(1j * p.theta2)

    def evaluate(t):
        h, e, hd, ed = diag(t)
        rabi = om0 * math.exp(-x * t * t)
        rabi_d = -2.0 * x * t * rabi
        rot = cmath.exp(-1j * wl * t)
        om = 0.5 * rabi * rot * ph1
        omd = 0.5 * (rabi_d - 1j * wl * rabi) * rot * ph1
        g = 0.5 * rabi * rot.conjugate() * ph2
        gd = 0.5 * (rabi_d + 1j * wl * rabi) * rot.conjugate() * ph2
        return (h, om + J, g + J, e, hd, omd, gd, ed)

    return HamiltonianModel(evaluate, label="atomlight", params=p, J=J, window=tuple(window))


def whispering_gallery_matrix(p: WhisperingGalleryParams) -> np.ndarray:
    """Static two-mode Hamiltonian of a microcavity with Rayleigh scatterers."""
    m = int(p.azimuthal_m)
    diag = complex(p.omega_unperturbed)
    a = 0j
    b = 0j
    for s in p.scatterers:
        diag += complex(s.V) + complex(s.U)
        a += (complex(s.V) - complex(s.U)) * cmath.exp(-2j * m * s.beta)
        b += (complex(s.V) - complex(s.U)) * cmath.exp(2j * m * s.beta)
    return np.array([[diag, a], [b, diag]], dtype=complex)


PRESETS = {
    "gaussian": gaussian_chirped_model,
    "rwa": rwa_model,
}


def build_preset(name, pulse: PulseParams, *, theta1=None, theta2=None, window=DEFAULT_WINDOW):
    """Construct a preset model by name; ``atomlight`` takes the theta phases."""
    if name == "atomlight":
        kwargs = {}
        if theta1 is not None:
            kwargs["theta1"] = theta1
        if theta2 is not None:
            kwargs["theta2"] = theta2
        return atom_light_model(AtomLightParams(pulse, **kwargs), window=window)
    try:
        return PRESETS[name](pulse, window=window)
    except KeyError:
        raise ValueError(f"unknown preset {name!r}") from None
