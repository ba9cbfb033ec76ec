"""Counterdiabatic (transitionless-driving) terms H1(t) for two-level models.

Every variant shares the structure ``H1 = i/(4 C1) [[-B1, A], [-D, B1]]`` with

    A  = Omegadot (e - h) - Omega (edot - hdot)
    D  = gdot (e - h) - g (edot - hdot)
    B1 = Omega gdot - Omegadot g
    C1 = d^2 + Omega g,  d = (e - h)/2

and differs only in how ``1/C1`` is evaluated: exactly, to first order in
``z = (K J1 + K* J0 + J0 J1)/(|K|^2 + d^2)``, or as a truncated power series in
a constant offset ``J`` of the off-diagonals.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ExceptionalPoint, ExpansionInvalid, OutsideConvergenceRadius
from .hamiltonians import HamiltonianModel, PulseParams, _rate
from .linalg import eigendecompose, projectors

EP_THRESHOLD = 1e-18
Z_WARN = 0.3


@dataclass(frozen=True)
class ExactIntermediates:
    A: complex
    D: complex
    B1: complex
    C1: complex


def intermediates(vals) -> ExactIntermediates:
    """``A, D, B1, C1`` from ``(h, Omega, g, e, hdot, Omegadot, gdot, edot)``."""
    h, om, g, e, hd, omd, gd, ed = vals
    diff = e - h
    diff_d = ed - hd
    d = 0.5 * diff
    return ExactIntermediates(
        A=omd * diff - om * diff_d,
        D=gd * diff - g * diff_d,
        B1=om * gd - omd * g,
        C1=d * d + om * g,
    )


def _structure(x: ExactIntermediates, factor):
    """Entries of ``factor * [[-B1, A], [-D, B1]]``."""
    return (-factor * x.B1, factor * x.A, -factor * x.D, factor * x.B1)


def _as_matrix(entries):
    m11, m12, m21, m22 = entries
    return np.array([[m11, m12], [m21, m22]], dtype=complex)


def exact_entries(model: HamiltonianModel, t, threshold=EP_THRESHOLD):
    x = intermediates(model.evaluate(t))
    if abs(x.C1) <= threshold:
        raise ExceptionalPoint(t, abs(x.C1))
    return _structure(x, 1j / (4.0 * x.C1))


def exact_counterterm(model: HamiltonianModel, t, threshold=EP_THRESHOLD) -> np.ndarray:
    """Exact counterterm at time ``t``.

    Raises
    ------
    ExceptionalPoint
        When ``|C1(t)| <= threshold`` (rad^2/ns^2); H1 diverges there.
    """
    return _as_matrix(exact_entries(model, t, threshold))


def projector_counterterm(H, H_dot) -> np.ndarray:
    """``i [M+ Hdot M- / (E- - E+) + M- Hdot M+ / (E+ - E-)]`` from the spectral projectors."""
    es = eigendecompose(H)
    m_plus, m_minus = projectors(es)
    gap = es.e_plus - es.e_minus
    return 1j * (m_minus @ H_dot @ m_plus - m_plus @ H_dot @ m_minus) / gap


# -- chirped-Gaussian specialization ----------------------------------------

@dataclass(frozen=True)
class GaussianCounterTermParts:
    nu: complex
    omega1: complex
    omega2: complex
    omega_a: complex
    omega_b: complex
    diag: complex

    def matrix(self) -> np.ndarray:
        return np.array([[self.diag, self.omega_a], [self.omega_b, -self.diag]], dtype=complex)


def model_counterterm_parts(p: PulseParams, t, threshold=EP_THRESHOLD) -> GaussianCounterTermParts:
    """``nu, Omega_1, Omega_2, Omega_a, Omega_b`` of the chirped-Gaussian model."""
    g1, g1d = _rate(p.gamma1)
    g2, g2d = _rate(p.gamma2)
    rabi = p.omega0 * math.exp(-p.chirp_x * t * t)
    rabi_d = -2.0 * p.chirp_x * t * rabi
    em = cmath.exp(-2j * p.omega_l * t)
    ep = em.conjugate()
    w = p.omega_l
    omega1 = rabi * (1 + em) + 2 * p.J
    omega2 = rabi * (1 + ep) + 2 * p.J
    omega1_d = rabi_d * (1 + em) - 2j * w * rabi * em
    omega2_d = rabi_d * (1 + ep) + 2j * w * rabi * ep
    delta = p.detuning(t)
    delta_d = -2.0 * p.chirp_y
    bracket = 2 * delta - 1j * (g1(t) + g2(t))
    bracket_d = 2 * delta_d - 1j * (g1d(t) + g2d(t))
    denom = bracket * bracket + 4 * omega1 * omega2
    # denom = 16 C1
    if abs(denom) / 16.0 <= threshold:
        raise ExceptionalPoint(t, abs(denom) / 16.0)
    nu = 1j / denom
    return GaussianCounterTermParts(
        nu=nu,
        omega1=omega1,
        omega2=omega2,
        omega_a=nu * (omega1_d * bracket - omega1 * bracket_d),
        omega_b=nu * (omega2 * bracket_d - omega2_d * bracket),
        diag=nu * (omega1_d * omega2 - omega1 * omega2_d),
    )


def model_counterterm(p: PulseParams, t, threshold=EP_THRESHOLD) -> np.ndarray:
    """Closed-form counterterm of the chirped-Gaussian model beyond the RWA."""
    return model_counterterm_parts(p, t, threshold).matrix()


# -- first-order perturbative counterterm -----------------------------------

@dataclass(frozen=True)
class PerturbationSplit:
    """``Omega = K + J0`` and ``g = conj(K) + J1``.

    Each callable maps ``t`` to ``(value, time derivative)``.
    """

    K: Callable[[float], tuple]
    J0: Callable[[float], tuple]
    J1: Callable[[float], tuple]

    @classmethod
    def constant(cls, model: HamiltonianModel, J=None):
        """Split with a constant offset ``J`` on both off-diagonals.

        Uses the model's own ``k_split`` when available, otherwise
        ``K = Omega - J``.
        """
        if J is None:
            J = model.J if model.J is not None else 0j
        J = complex(J)
        const = (lambda t: (J, 0j))
        if model.k_split is not None and (model.J is None or model.J == J):
            return cls(model.k_split, const, const)

        def K(t):
            vals = model.evaluate(t)
            return vals[1] - J, vals[5]
        return cls(K, const, const)

    @classmethod
    def from_k(cls, model: HamiltonianModel, K):
        """Split around a given ``K(t) -> (K, Kdot)``; ``J0``, ``J1`` absorb the rest."""
        def J0(t):
            vals = model.evaluate(t)
            k, kd = K(t)
            return vals[1] - k, vals[5] - kd

        def J1(t):
            vals = model.evaluate(t)
            k, kd = K(t)
            return vals[2] - k.conjugate(), vals[6] - kd.conjugate()
        return cls(K, J0, J1)

    def reconstruction_error(self, model: HamiltonianModel, t) -> float:
        vals = model.evaluate(t)
        k = self.K(t)[0]
        return max(abs(k + self.J0(t)[0] - vals[1]), abs(k.conjugate() + self.J1(t)[0] - vals[2]))


def _split_values(split: PerturbationSplit, model: HamiltonianModel, t):
    vals = model.evaluate(t)
    h, e, hd, ed = vals[0], vals[3], vals[4], vals[7]
    k, kd = split.K(t)
    j0, j0d = split.J0(t)
    j1, j1d = split.J1(t)
    return h, e, hd, ed, k, kd, j0, j0d, j1, j1d


def expansion_parameter(split: PerturbationSplit, model: HamiltonianModel, t):
    """``(z, |K|^2 + d^2)`` with ``C1 = (|K|^2 + d^2)(1 + z)``."""
    h, e, _, _, k, _, j0, _, j1, _ = _split_values(split, model, t)
    d = 0.5 * (e - h)
    q = abs(k) ** 2 + d * d
    return (k * j1 + k.conjugate() * j0 + j0 * j1) / q, q


def perturbative_entries(split, model, t, check=True):
    h, e, hd, ed, k, kd, j0, j0d, j1, j1d = _split_values(split, model, t)
    d = 0.5 * (e - h)
    q = abs(k) ** 2 + d * d
    z = (k * j1 + k.conjugate() * j0 + j0 * j1) / q
    if check:
        if abs(z) >= 1.0:
            raise ExpansionInvalid(t, z)
        if abs(z) > Z_WARN:
            warnings.warn(f"|z|={abs(z):.3f} > {Z_WARN} at t={t}: first-order expansion is poor",
                          RuntimeWarning, stacklevel=3)
    om, g = k + j0, k.conjugate() + j1
    omd, gd = kd + j0d, kd.conjugate() + j1d
    x = intermediates((h, om, g, e, hd, omd, gd, ed))
    return _structure(x, 1j * (1.0 - z) / (4.0 * q))


def perturbative_counterterm(split: PerturbationSplit, model: HamiltonianModel, t,
                             check=True) -> np.ndarray:
    """First-order approximation: ``1/C1 -> (1 - z)/(|K|^2 + d^2)``.

    With ``check`` set, raises :class:`ExpansionInvalid` for ``|z| >= 1`` and
    warns above 0.3.
    """
    return _as_matrix(perturbative_entries(split, model, t, check))


def perturbative_terms(split: PerturbationSplit, model: HamiltonianModel, t):
    """The three separately written matrices whose sum is the first-order counterterm.

    Returns ``(unperturbed, offset_part, correction)``: the K-only structure over
    ``|K|^2 + d^2``, the J-dependent remainder over the same denominator, and the
    ``-(K* J0 + K J1 + J0 J1)/(|K|^2 + d^2)^2`` correction times the full structure.
    """
    h, e, hd, ed, k, kd, j0, j0d, j1, j1d = _split_values(split, model, t)
    kc, kdc = k.conjugate(), kd.conjugate()
    diff, diff_d = e - h, ed - hd
    d = 0.5 * diff
    q = abs(k) ** 2 + d * d
    pre = 1j / (4.0 * q)
    cross = kdc * j0 + k * j1d - kc * j0d - kd * j1 + j0 * j1d - j0d * j1
    first = pre * np.array([
        [kd * kc - k * kdc, kd * diff - k * diff_d],
        [kc * diff_d - kdc * diff, k * kdc - kd * kc],
    ])
    second = pre * np.array([
        [-cross, j0d * diff - j0 * diff_d],
        [j1 * diff_d - j1d * diff, cross],
    ])
    third = -1j * (kc * j0 + k * j1 + j0 * j1) / (4.0 * q * q) * np.array([
        [kd * kc - k * kdc - cross, (kd + j0d) * diff - (k + j0) * diff_d],
        [(kc + j1) * diff_d - (kdc + j1d) * diff, k * kdc - kd * kc + cross],
    ])
    return first, second, third


# -- power series in a constant offset J ------------------------------------

def _k_and_diag(model: HamiltonianModel, t, J):
    vals = model.evaluate(t)
    h, e, hd, ed = vals[0], vals[3], vals[4], vals[7]
    if model.k_split is not None and (model.J is None or model.J == J):
        k, kd = model.k_split(t)
    else:
        k, kd = vals[1] - J, vals[5]
    return h, e, hd, ed, complex(k), complex(kd)


def series_roots(k, d):
    """Roots ``s1, s2 = -Kr +/- sqrt(Kr^2 - (|K|^2 + d^2))`` of ``C1(J) = 0``."""
    kr = k.real
    q = abs(k) ** 2 + d * d
    root = cmath.sqrt(kr * kr - q)
    return -kr + root, -kr - root


def series_coefficients(s1, s2, n_max):
    """Taylor coefficients ``a_n`` of ``1/C1 = sum_n a_n J^n`` for ``n = 0..n_max``.

    ``a_n = (s2^-(n+1) - s1^-(n+1)) / (s1 - s2)``, evaluated as the equivalent
    finite sum ``sum_k s1^-(n+1-k) s2^-(k+1)`` so coincident roots stay finite.
    """
    u1, u2 = 1.0 / s1, 1.0 / s2
    out = []
    # p1[j] = u1^j, p2[j] = u2^j
    p1 = [1.0 + 0j]
    p2 = [1.0 + 0j]
    for n in range(n_max + 1):
        p1.append(p1[-1] * u1)
        p2.append(p2[-1] * u2)
        out.append(sum(p1[n + 1 - k] * p2[k + 1] for k in range(n + 1)))
    return out


def _series_matrices(h, e, hd, ed, k, kd):
    kc, kdc = k.conjugate(), kd.conjugate()
    diff, diff_d = e - h, ed - hd
    m_k = np.array([
        [kd * kc - k * kdc, kd * diff - k * diff_d],
        [kc * diff_d - kdc * diff, k * kdc - kd * kc],
    ])
    m_j = np.array([
        [kd - kdc, -diff_d],
        [diff_d, kdc - kd],
    ])
    return m_k, m_j


@dataclass(frozen=True)
class SeriesExpansion:
    """Series data at one time: roots, radius and the matrices ``L^(0..N)``."""

    t: float
    J: complex
    s1: complex
    s2: complex
    terms: tuple

    @property
    def radius(self) -> float:
        return min(abs(self.s1), abs(self.s2))

    def partial_sum(self, n) -> np.ndarray:
        """``c_n = sum_{m<=n} J^m L^(m)``."""
        total = np.zeros((2, 2), dtype=complex)
        jm = 1.0 + 0j
        for term in self.terms[: n + 1]:
            total = total + jm * term
            jm *= self.J
        return total


def series_expansion(model: HamiltonianModel, t, n_max, J=None) -> SeriesExpansion:
    """Series terms ``L^(n)`` for the split ``Omega = K + J``, ``g = K* + J``."""
    if J is None:
        J = model.J if model.J is not None else 0j
    J = complex(J)
    h, e, hd, ed, k, kd = _k_and_diag(model, t, J)
    d = 0.5 * (e - h)
    s1, s2 = series_roots(k, d)
    coeffs = series_coefficients(s1, s2, n_max)
    m_k, m_j = _series_matrices(h, e, hd, ed, k, kd)
    terms = []
    for n in range(n_max + 1):
        prev = coeffs[n - 1] if n > 0 else 0j
        terms.append(0.25j * (coeffs[n] * m_k + prev * m_j))
    return SeriesExpansion(t=t, J=J, s1=s1, s2=s2, terms=tuple(terms))


def printed_low_order_terms(model: HamiltonianModel, t, J=None):
    """Closed forms of ``L^(0)`` and ``L^(1)`` written directly in the roots."""
    if J is None:
        J = model.J if model.J is not None else 0j
    h, e, hd, ed, k, kd = _k_and_diag(model, t, complex(J))
    s1, s2 = series_roots(k, 0.5 * (e - h))
    m_k, m_j = _series_matrices(h, e, hd, ed, k, kd)
    l0 = 1j / (4 * s1 * s2) * m_k
    l1 = 1j / (4 * s1 * s2) * m_j + 1j * (s1 + s2) / (4 * s1**2 * s2**2) * m_k
    return l0, l1


def convergence_radius(model: HamiltonianModel, t, J=None) -> float:
    """``min(|s1|, |s2|)``: the series in J converges for ``|J|`` below this."""
    if J is None:
        J = model.J if model.J is not None else 0j
    h, e, _, _, k, _ = _k_and_diag(model, t, complex(J))
    s1, s2 = series_roots(k, 0.5 * (e - h))
    return min(abs(s1), abs(s2))


def series_entries(model, order, t, J=None, check=True):
    if J is None:
        J = model.J if model.J is not None else 0j
    J = complex(J)
    h, e, hd, ed, k, kd = _k_and_diag(model, t, J)
    s1, s2 = series_roots(k, 0.5 * (e - h))
    radius = min(abs(s1), abs(s2))
    if check and abs(J) >= radius:
        raise OutsideConvergenceRadius(t, abs(J), radius)
    coeffs = series_coefficients(s1, s2, order)
    # sum_n J^n (a_n M_K + a_{n-1} M_J) = A_N M_K + J A_{N-1} M_J
    a_sum = 0j
    a_prev_sum = 0j
    jn = 1.0 + 0j
    for n in range(order + 1):
        a_sum += jn * coeffs[n]
        if n < order:
            a_prev_sum += jn * coeffs[n]
        jn *= J
    m_k, m_j = _series_matrices(h, e, hd, ed, k, kd)
    m = 0.25j * (a_sum * m_k + J * a_prev_sum * m_j)
    return (m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def series_counterterm(model: HamiltonianModel, order: int, t, J=None, check=True) -> np.ndarray:
    """Truncated series ``c_N(t) = sum_{n<=N} J^n L^(n)(t)``.

    Raises
    ------
    OutsideConvergenceRadius
        When ``check`` is set and ``|J| >= min(|s1(t)|, |s2(t)|)``.
    """
    if order < 0:
        raise ValueError("series order must be non-negative")
    return _as_matrix(series_entries(model, order, t, J, check))


# -- strategy object ---------------------------------------------------------

KINDS = ("exact", "perturbative", "series", "zero")


@dataclass(frozen=True)
class CounterTerm:
    """A counterterm recipe evaluated on demand.

    Parameters
    ----------
    kind : {"exact", "perturbative", "series", "zero"}
    source : HamiltonianModel
        The model whose instantaneous eigenstates the term is designed for. It
        may differ from the Hamiltonian it is later added to (e.g. an RWA design).
    order : int
        Truncation order for ``kind="series"``.
    suppress_real_offdiag : bool
        Drop the real parts of both off-diagonal entries after evaluation.
    split : PerturbationSplit, optional
        For ``kind="perturbative"``; defaults to the constant-J split of ``source``.
    check : bool
        Enforce the validity conditions of the approximate kinds.
    """

    kind: str
    source: HamiltonianModel | None = None
    order: int = 0
    suppress_real_offdiag: bool = False
    split: PerturbationSplit | None = None
    check: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown counterterm kind {self.kind!r}; expected one of {KINDS}")
        if self.kind != "zero" and self.source is None:
            raise ValueError(f"counterterm kind {self.kind!r} needs a source model")
        if self.kind == "perturbative" and self.split is None:
            object.__setattr__(self, "split", PerturbationSplit.constant(self.source))

    def entries(self, t):
        if self.kind == "zero":
            return (0j, 0j, 0j, 0j)
        if self.kind == "exact":
            m11, m12, m21, m22 = exact_entries(self.source, t)
        elif self.kind == "perturbative":
            m11, m12, m21, m22 = perturbative_entries(self.split, self.source, t, self.check)
        else:
            m11, m12, m21, m22 = series_entries(self.source, self.order, t, check=self.check)
        if self.suppress_real_offdiag:
            m12 = 1j * m12.imag
            m21 = 1j * m21.imag
        return m11, m12, m21, m22

    def __call__(self, t) -> np.ndarray:
        return _as_matrix(self.entries(t))
