"""Closed-form biorthogonal eigen-decomposition of a general complex 2x2 matrix.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype ``complex128``
laid out as ``[[h, Omega], [g, e]]``. Right eigenvectors are column vectors;
left eigenvectors are stored as the *bra* components, so ``w @ v`` (no complex
conjugation) is the biorthogonal pairing and ``np.outer(v, w)`` a projector.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum

# |d^2 + g*Omega| below this flags coalescing eigenvalues
DEGENERACY_THRESHOLD = 1e-24

# normalization underflow guard for the Lambda-gauge eigenvectors
_TINY_NORM2 = 1e-280


def mat2c(m11, m12, m21, m22) -> np.ndarray:
    return np.array([[m11, m12], [m21, m22]], dtype=complex)


@dataclass(frozen=True)
class EigenSystem:
    """Instantaneous eigen-data of ``H = [[h, Omega], [g, e]]``.

    Attributes
    ----------
    e_plus, e_minus : complex
        Eigenvalues ``k +/- r`` with ``r = branch_sign * sqrt(d^2 + g*Omega)``.
    v_plus, v_minus : ndarray
        Right eigenvectors ``(Omega, Lambda)/S``.
    w_plus, w_minus : ndarray
        Left eigenvectors (bra components) ``(g, Lambda)/S``.
    d, k : complex
        Half difference and half sum of the diagonal, ``(e - h)/2`` and ``(e + h)/2``.
    lambda_plus, lambda_minus, s_plus, s_minus : complex
        ``Lambda = d +/- r`` and the normalizations ``S``.
    branch_sign : int
        +1 when the "+" label carries the principal square root.
    gauge : tuple of str
        ``"lambda"`` for the ``(Omega, Lambda)/S`` form, ``"alt"`` where it
        degenerates (``g*Omega == 0``) and the row-two form is used instead.
    """

    e_plus: complex
    e_minus: complex
    v_plus: np.ndarray
    v_minus: np.ndarray
    w_plus: np.ndarray
    w_minus: np.ndarray
    d: complex
    k: complex
    lambda_plus: complex
    lambda_minus: complex
    s_plus: complex
    s_minus: complex
    branch_sign: int
    gauge: tuple = ("lambda", "lambda")

    @property
    def root(self) -> complex:
        """Half the eigenvalue gap, ``(E+ - E-)/2``."""
        return 0.5 * (self.e_plus - self.e_minus)

    def right(self, branch: str) -> np.ndarray:
        return self.v_plus if branch == "+" else self.v_minus

    def left(self, branch: str) -> np.ndarray:
        return self.w_plus if branch == "+" else self.w_minus

    def energy(self, branch: str) -> complex:
        return self.e_plus if branch == "+" else self.e_minus

    def right_matrix(self) -> np.ndarray:
        """Columns are ``v_plus``, ``v_minus``."""
        return np.column_stack([self.v_plus, self.v_minus])

    def left_matrix(self) -> np.ndarray:
        """Rows are ``w_plus``, ``w_minus``; the inverse of :meth:`right_matrix`."""
        return np.vstack([self.w_plus, self.w_minus])


def _branch_vectors(lam, lam_other, r, sign, om, g):
    """Right/left vectors of one branch.

    ``sign`` is +1 for the "+" label, -1 for "-". Uses ``S^2 = +/-2 r Lambda``,
    which equals ``g*Omega + Lambda^2`` without cancellation.
    """
    s2 = sign * 2.0 * r * lam
    if abs(s2) > _TINY_NORM2:
        s = cmath.sqrt(s2)
        v = np.array([om / s, lam / s], dtype=complex)
        w = np.array([g / s, lam / s], dtype=complex)
        if np.all(np.isfinite(v)) and np.all(np.isfinite(w)):
            return v, w, s, "lambda"
    # second-row form (E - e, g) and its dual (E - e, Omega); E - e = -lam_other
    s2 = lam_other * lam_other + g * om
    s = cmath.sqrt(s2)
    v = np.array([-lam_other / s, g / s], dtype=complex)
    w = np.array([-lam_other / s, om / s], dtype=complex)
    return v, w, s, "alt"


def eigendecompose(H, hint: EigenSystem | None = None) -> EigenSystem:
    """Biorthonormal eigen-system of a 2x2 complex matrix.

    Without ``hint`` the "+" label takes the principal square root of
    ``d^2 + g*Omega``. With ``hint`` the sign is chosen to keep both eigenvalue
    curves closest to the hinted ones, and the sign of each normalization ``S``
    is chosen to keep the right eigenvectors closest to the hinted ones.

    Raises
    ------
    DegenerateSpectrum
        If ``|d^2 + g*Omega| < 1e-24``.
    """
    H = np.asarray(H, dtype=complex)
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    h, om = complex(H[0, 0]), complex(H[0, 1])
    g, e = complex(H[1, 0]), complex(H[1, 1])
    d = 0.5 * (e - h)
    k = 0.5 * (e + h)
    disc = d * d + g * om
    if abs(disc) < DEGENERACY_THRESHOLD:
        raise DegenerateSpectrum(f"|d^2 + g*Omega| = {abs(disc):.3e} (coalescing eigenvalues)")
    root = cmath.sqrt(disc)

    sign = 1
    if hint is not None:
        cost_p = abs(k + root - hint.e_plus) + abs(k - root - hint.e_minus)
        cost_m = abs(k - root - hint.e_plus) + abs(k + root - hint.e_minus)
        if cost_m < cost_p:
            sign = -1
    r = sign * root

    # Lambda+ * Lambda- = -g*Omega; take the larger directly, the smaller by division
    lp, lm = d + r, d - r
    if abs(lp) >= abs(lm):
        lm = -g * om / lp
    else:
        lp = -g * om / lm

    v_p, w_p, s_p, gauge_p = _branch_vectors(lp, lm, r, +1, om, g)
    v_m, w_m, s_m, gauge_m = _branch_vectors(lm, lp, r, -1, om, g)

    if hint is not None:
        if np.linalg.norm(v_p + hint.v_plus) < np.linalg.norm(v_p - hint.v_plus):
            v_p, w_p, s_p = -v_p, -w_p, -s_p
        if np.linalg.norm(v_m + hint.v_minus) < np.linalg.norm(v_m - hint.v_minus):
            v_m, w_m, s_m = -v_m, -w_m, -s_m

    return EigenSystem(
        e_plus=k + r,
        e_minus=k - r,
        v_plus=v_p,
        v_minus=v_m,
        w_plus=w_p,
        w_minus=w_m,
        d=d,
        k=k,
        lambda_plus=lp,
        lambda_minus=lm,
        s_plus=s_p,
        s_minus=s_m,
        branch_sign=sign,
        gauge=(gauge_p, gauge_m),
    )


def projectors(es: EigenSystem) -> tuple[np.ndarray, np.ndarray]:
    """Spectral projectors ``(M+, M-)`` with ``M = |v><w|``."""
    return np.outer(es.v_plus, es.w_plus), np.outer(es.v_minus, es.w_minus)


def eigen_path(matrices, hint: EigenSystem | None = None) -> list[EigenSystem]:
    """Decompose a sequence of matrices with eigenvalue continuation."""
    out = []
    for H in matrices:
        hint = eigendecompose(H, hint)
        out.append(hint)
    return out
