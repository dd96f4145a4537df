"""Variational equations at a relative equilibrium and spectral tests.

State ordering is ``(z, Z, r, Upsilon[, theta[, Theta]])`` with ``z`` the
``2N - 4`` shape coordinates. The shape block is always
``[[0, I], [Lambda / rho^3, -2 omega Q]]``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .nbody import CentralConfigAnalysis, check_masses

SPECTRAL_RTOL = 1e-9
JORDAN_COND = 1e8


class VariationalKind(str, enum.Enum):
    FULL = "full"
    MOMENTUM_REDUCED = "momentum_reduced"
    ORBITAL = "orbital"
    SHAPE = "shape"


class InconsistentRateError(ValueError):
    """``omega^2`` does not match ``lambda`` at unit scale."""


@dataclass(frozen=True)
class VariationalMatrix:
    kind: VariationalKind
    matrix: np.ndarray
    omega: float
    rho: float = 1.0
    n_shape: int = 0

    @property
    def shape_block(self) -> np.ndarray:
        n = 2 * self.n_shape
        return self.matrix[:n, :n]


@dataclass(frozen=True)
class SpectralVerdict:
    eigenvalues: np.ndarray
    spectrally_stable: bool
    linearly_stable: bool
    max_real_part: float
    eigvec_condition: float


def shape_block(eigenvalues, Q, omega, rho=1.0) -> np.ndarray:
    """``[[0, I], [Lambda / rho^3, -2 omega Q]]``."""
    lam = np.asarray(eigenvalues, dtype=float)
    Q = np.asarray(Q, dtype=float)
    n = lam.size
    M = np.zeros((2 * n, 2 * n))
    M[:n, n:] = np.eye(n)
    M[n:, :n] = np.diag(lam) / rho ** 3
    M[n:, n:] = -2.0 * omega * Q
    return M


def build_variational(analysis: CentralConfigAnalysis, omega: float | None = None,
                      kind: VariationalKind | str = VariationalKind.ORBITAL, rho: float = 1.0,
                      rtol: float = 1e-9) -> VariationalMatrix:
    """Assemble the linearization for the requested reduction level.

    ``omega`` defaults to ``sqrt(lambda)``; an explicit value must satisfy
    ``lambda = rho^3 omega^2``.
    """
    kind = VariationalKind(kind)
    lam = analysis.lam
    if omega is None:
        omega = float(np.sqrt(lam / rho ** 3))
    elif abs(rho ** 3 * omega ** 2 - lam) > rtol * max(abs(lam), 1e-300) and omega != 0:
        raise InconsistentRateError(f"omega^2 rho^3 = {rho ** 3 * omega ** 2!r} differs from lambda = {lam!r}")
    return _assemble(analysis.shape_eigenvalues, analysis.Q, omega, kind, rho)


def _assemble(shape_eigs, Q, omega, kind, rho=1.0) -> VariationalMatrix:
    kind = VariationalKind(kind)
    S = shape_block(shape_eigs, Q, omega, rho)
    n = len(shape_eigs)
    if kind is VariationalKind.SHAPE:
        return VariationalMatrix(kind, S, omega, rho, n)
    if kind is VariationalKind.ORBITAL:
        R = np.array([[0.0, 1.0], [-omega ** 2, 0.0]])
    elif kind is VariationalKind.MOMENTUM_REDUCED:
        R = np.array([[0.0, 1.0, 0.0], [-omega ** 2, 0.0, 0.0], [-2 * omega / rho, 0.0, 0.0]])
    else:
        R = np.array([[0.0, 1.0, 0.0, 0.0],
                      [3 * omega ** 2, 0.0, 0.0, 2 * rho * omega],
                      [0.0, 0.0, 0.0, 1.0],
                      [0.0, -2 * omega / rho, 0.0, 0.0]])
    M = np.zeros((S.shape[0] + R.shape[0],) * 2)
    M[:S.shape[0], :S.shape[0]] = S
    M[S.shape[0]:, S.shape[0]:] = R
    return VariationalMatrix(kind, M, omega, rho, n)


def spectral_verdict(vm: VariationalMatrix | np.ndarray, rtol: float = SPECTRAL_RTOL,
                     cond_max: float = JORDAN_COND) -> SpectralVerdict:
    """Spectral stability (all eigenvalues on the imaginary axis) and a diagonalizability test."""
    M = vm.matrix if isinstance(vm, VariationalMatrix) else np.asarray(vm, dtype=float)
    try:
        evals, evecs = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ArithmeticError("eigen-solver failed") from exc
    scale = max(np.linalg.norm(M, 2), 1e-300)
    max_re = float(np.max(np.abs(evals.real)))
    spectral = max_re <= rtol * scale
    with np.errstate(all="ignore"):
        cond = float(np.linalg.cond(evecs))
    linear = spectral and np.isfinite(cond) and cond < cond_max
    return SpectralVerdict(evals, bool(spectral), bool(linear), float(np.max(evals.real)), cond)


def characteristic_even_poly(vm: VariationalMatrix | None = None, shape_eigs=None, Q=None,
                             omega=None) -> np.ndarray:
    """Coefficients of ``f(s) = det(s I - 2 omega x Q - Lambda)`` as a polynomial in ``s = x^2``.

    Returned highest power first with leading coefficient 1. The determinant
    of ``x^2 I - 2 omega x Q - Lambda`` is even in ``x`` because ``Q`` is
    anti-symmetric; it is obtained from the eigenvalues of the shape block.
    """
    if vm is not None:
        S = vm.shape_block
    else:
        S = shape_block(shape_eigs, Q, omega)
    coeffs = np.real_if_close(np.poly(np.linalg.eigvals(S)), tol=1e6)
    coeffs = np.real(coeffs)
    even = coeffs[::2].copy()
    return even


def routh_criterion(masses) -> bool:
    """Spectral stability of the equilateral configuration: ``beta <= (sum m)^2 / 27``."""
    m = check_masses(masses)
    if m.size != 3:
        raise ValueError("the Routh criterion concerns three bodies")
    beta = m[0] * m[1] + m[1] * m[2] + m[2] * m[0]
    return bool(27.0 * beta <= m.sum() ** 2)


def equilateral_shape_verdict(beta: float, rtol: float = SPECTRAL_RTOL) -> SpectralVerdict:
    """Spectral verdict of the closed-form shape block at unit scale."""
    alpha = np.sqrt(max(1 - 3 * beta, 0.0))
    lam = beta ** 1.5
    eigs = [1.5 * (1 - alpha) * lam, 1.5 * (1 + alpha) * lam]
    Q = np.array([[0.0, -1.0], [1.0, 0.0]])
    return spectral_verdict(shape_block(eigs, Q, np.sqrt(lam)), rtol=rtol)


def routh_boundary_bisection(tol: float = 1e-10, lo: float = 0.02, hi: float = 0.05) -> float:
    """Locate the beta where the shape spectrum leaves the imaginary axis."""
    if not equilateral_shape_verdict(lo).spectrally_stable or equilateral_shape_verdict(hi).spectrally_stable:
        raise ValueError("bracket does not straddle the stability boundary")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if equilateral_shape_verdict(mid).spectrally_stable:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
