"""Three-body specialization at the Lagrange equilateral equilibrium.

Mass parameters and frequencies, the Taylor coefficients of the force
function in the shape plane, the reduced Hamiltonian through quartic order
and the two symplectic changes of variables used before normalization.

Phase-space polynomials use six variables. In the ``"pq"`` chart they are
``(p0, p1, p2, q0, q1, q2)`` with ``q0`` the radial offset and ``q1, q2`` the
shape coordinates; in ``"xy"`` they are ``(x0, x1, x2, y0, y1, y2)`` and in
``"zeta_eta"`` they are ``(zeta0, zeta1, zeta2, eta0, eta1, eta2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .nbody import (CentralConfigAnalysis, analyze_central_config, check_masses,
                    equilateral_configuration, force_taylor, shape_force_quartic)
from .polynomial import SparsePolynomial, binomial_series, geometric_series

SQRT69_BOUND = (np.sqrt(69.0) + 9.0) / 18.0
ROUTH_BETA = 1.0 / 27.0
NVARS = 6
_MP_DPS = 40


class FrequencyCollisionError(ValueError):
    """The two shape frequencies collide (beta >= 1/27) or are not real."""


@dataclass(frozen=True)
class MassParameters:
    """Masses of the three bodies and the derived scalars.

    ``gamma`` is NaN when ``beta > 1/27``; ``kappa`` is NaN when its radicand
    is not positive.
    """

    m1: float
    m2: float
    m3: float
    beta: float
    alpha: float
    gamma: float
    kappa: float
    in_Omega: bool
    in_Omega_ss: bool

    @property
    def masses(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3])

    @property
    def mass_product(self) -> float:
        return self.m1 * self.m2 * self.m3


def omega_membership(beta, m1):
    """Membership in the mass space ``Omega`` (vectorized)."""
    beta = np.asarray(beta, dtype=float)
    m1 = np.asarray(m1, dtype=float)
    return ((beta > 0) & (beta <= 1 / 3) & (m1 >= 1 / 3) & (m1 < 1)
            & (beta - m1 * (1 - m1) > 0) & (4 * beta <= 1 + 2 * m1 - 3 * m1 ** 2))


def omega_ss_membership(beta, m1):
    beta = np.asarray(beta, dtype=float)
    m1 = np.asarray(m1, dtype=float)
    return omega_membership(beta, m1) & (beta <= ROUTH_BETA) & (m1 > SQRT69_BOUND)


def mass_parameters(masses) -> MassParameters:
    """Derived scalars of a normalized mass triple."""
    m = check_masses(masses, normalized=True)
    if m.size != 3:
        raise ValueError("mass_parameters needs exactly three masses")
    m1, m2, m3 = (float(v) for v in m)
    beta = m1 * m2 + m2 * m3 + m3 * m1
    alpha = float(np.sqrt(max(1.0 - 3.0 * beta, 0.0)))
    gamma = float(np.sqrt(1.0 - 27.0 * beta)) if beta <= ROUTH_BETA else float("nan")
    k2 = 4 * beta * m3 * (2 - 6 * beta + alpha - 3 * alpha * m2) / (3 * m1 * m2)
    kappa = float(np.sqrt(k2)) if k2 > 0 else float("nan")
    return MassParameters(m1, m2, m3, beta, alpha, gamma, kappa,
                          bool(omega_membership(beta, m1)), bool(omega_ss_membership(beta, m1)))


def masses_from_beta_m1(beta, m1):
    """Invert ``(beta, m1) -> (m1, m2, m3)`` with ``m2 >= m3``.

    ``m2, m3`` are the roots of ``t^2 - (1 - m1) t + beta - m1 (1 - m1)``.
    """
    beta = float(beta)
    m1 = float(m1)
    s = 1.0 - m1
    p = beta - m1 * s
    disc = s * s - 4.0 * p
    if not (0 < m1 < 1) or p <= 0 or disc < -1e-15:
        raise ValueError(f"(beta, m1) = ({beta!r}, {m1!r}) is outside the mass space")
    root = np.sqrt(max(disc, 0.0))
    m2 = 0.5 * (s + root)
    m3 = p / m2  # avoids cancellation in (s - root) / 2
    return np.array([m1, m2, m3])


def mass_parameters_from_beta_m1(beta, m1) -> MassParameters:
    return mass_parameters(masses_from_beta_m1(beta, m1))


def band_m1(beta, s=0.5):
    """``m1`` such that ``(beta, m1)`` has ``4 m2 m3 / (m2 + m3)^2 = s``.

    With ``mu = 1 - m1`` the constraint reads ``beta = mu - (1 - s/4) mu^2``.
    """
    beta = np.asarray(beta, dtype=float)
    if np.any((s <= 0) | (s > 1)):
        raise ValueError("band fraction s must lie in (0, 1]")
    a = 1.0 - s / 4.0
    disc = 1.0 - 4.0 * a * beta
    if np.any(disc < 0):
        raise ValueError("beta too large for the requested band fraction")
    mu = 2.0 * beta / (1.0 + np.sqrt(disc))
    m1 = 1.0 - mu
    return float(m1) if m1.ndim == 0 else m1


@dataclass(frozen=True)
class FrequencySet:
    """Linear frequencies at the equilibrium; the signature is ``(+, -, +)``."""

    omega0: float
    omega1: float
    omega2: float
    mu1: float
    mu2: float

    @property
    def signed(self) -> np.ndarray:
        """Signed frequency vector ``(omega0, -omega1, omega2)``."""
        return np.array([self.omega0, -self.omega1, self.omega2])

    @property
    def unsigned(self) -> np.ndarray:
        return np.array([self.omega0, self.omega1, self.omega2])


def mu_values(beta):
    """``(mu1, mu2)`` for ``0 < beta <= 1/27`` (vectorized)."""
    gamma = np.sqrt(1.0 - 27.0 * np.asarray(beta, dtype=float))
    return np.sqrt((1 - gamma) / 2), np.sqrt((1 + gamma) / 2)


def frequencies_from_beta(beta) -> FrequencySet:
    beta = float(beta)
    if not (0 < beta < ROUTH_BETA):
        raise FrequencyCollisionError(f"frequencies need 0 < beta < 1/27, got {beta!r}")
    w0 = beta ** 0.75
    mu1, mu2 = mu_values(beta)
    return FrequencySet(w0, float(mu1 * w0), float(mu2 * w0), float(mu1), float(mu2))


def frequencies(mp_: MassParameters) -> FrequencySet:
    return frequencies_from_beta(mp_.beta)


def shape_eigenvalues(beta):
    """Closed-form ``(lambda5, lambda6)`` of the equilateral configuration."""
    beta = np.asarray(beta, dtype=float)
    alpha = np.sqrt(1 - 3 * beta)
    return 1.5 * (1 - alpha) * beta ** 1.5, 1.5 * (1 + alpha) * beta ** 1.5


def reference_shape_vector(mp_: MassParameters) -> np.ndarray:
    """Closed-form eigenvector for ``lambda5`` (fixes the sign of ``E5``)."""
    m1, m2, m3, al, ka = mp_.m1, mp_.m2, mp_.m3, mp_.alpha, mp_.kappa
    s3 = np.sqrt(3.0)
    return np.array([
        (m1 - m3) * m3 / (ka * m1),
        (3 * m2 - 2 * al - 1) * m3 / (s3 * ka * m1),
        (m2 - al - m1) * m3 / (ka * m2),
        (al + 3 * m3 - 1) * m3 / (s3 * ka * m2),
        (al - m2 + m3) / ka,
        (al + 3 * m1 - 1) / (s3 * ka),
    ])


def lagrange_analysis(mp_: MassParameters) -> CentralConfigAnalysis:
    """Central-configuration analysis of the equilateral triangle with the closed-form sign of ``E5``."""
    r = equilateral_configuration(mp_.masses)
    ref = reference_shape_vector(mp_)
    if not np.all(np.isfinite(ref)):
        ref = None
    return analyze_central_config(r, mp_.masses, reference=None if ref is None else [ref])


@dataclass(frozen=True)
class CubicQuarticCoeffs:
    """Coefficients of ``U`` in the shape plane: ``a_ij`` multiplies ``q1^i q2^j``."""

    a30: float
    a21: float
    a12: float
    a03: float
    a40: float
    a31: float
    a22: float
    a13: float
    a04: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("a30", "a21", "a12", "a03", "a40", "a31", "a22", "a13", "a04")}

    def cubic_polynomial_terms(self) -> dict:
        return {(3, 0): self.a30, (2, 1): self.a21, (1, 2): self.a12, (0, 3): self.a03}

    def quartic_polynomial_terms(self) -> dict:
        return {(4, 0): self.a40, (3, 1): self.a31, (2, 2): self.a22, (1, 3): self.a13, (0, 4): self.a04}


def cubic_quartic_coeffs(mp_: MassParameters) -> CubicQuarticCoeffs:
    """Closed forms of the nine shape-plane coefficients, evaluated with 40 digits."""
    with mp.workdps(_MP_DPS):
        m1, m2, m3 = (mp.mpf(v) for v in (mp_.m1, mp_.m2, mp_.m3))
        beta = m1 * m2 + m2 * m3 + m3 * m1
        al = mp.sqrt(1 - 3 * beta)
        k2 = 4 * beta * m3 * (2 - 6 * beta + al - 3 * al * m2) / (3 * m1 * m2)
        if k2 <= 0:
            raise ValueError("kappa vanishes for these masses")
        ka = mp.sqrt(k2)
        s3 = mp.sqrt(3)
        d = m2 - m3
        prod = m1 * m2 * m3

        a3012 = (m3 * beta ** 3 * (al - 1) ** 2 * (al - 3 * m1 + 1)
                 * (3 * al * (2 * al - 1) + (2 - 5 * al) * d + 3 * m1 * (3 * al - 2 * m2 + 2 * m3))
                 / (36 * s3 * ka ** 3 * m1 ** 2 * m2 ** 2))
        a2103 = -(m3 * beta ** 3 * (al + 1) ** 2 * (al + 3 * m1 - 1)
                  * (10 * al ** 2 + al - 9 * al * m2 + 9 * al * m3 - 3 * (al - 4) * m1 - 18 * m1 ** 2 - 2)
                  / (108 * ka ** 3 * m1 ** 2 * m2 ** 2))
        a30 = (13 * al + 5) * a3012
        a12 = -3 * (9 * al + 5) * a3012
        a21 = -3 * (9 * al - 5) * a2103
        a03 = (13 * al - 5) * a2103

        a4004 = ((m1 * (8 - 13 * al ** 2 - 4 * al + 3 * (4 * al - 1) * d)
                  + (al - 1) * (1 - 8 * al ** 2 + al + (7 * al - 1) * d)
                  + 3 * (4 * al - 7) * m1 ** 2 + 18 * m1 ** 3)
                 * beta ** mp.mpf(3.5) * m3 / (1296 * ka ** 4 * m1 ** 3 * m2 ** 4))
        a40 = (-(al ** 2 - 1) ** 2 * (40 * al ** 3 - 123 * al ** 2 + 35)
               - 27 * (41 * al ** 4 + 8 * al ** 3 + 50 * al ** 2 - 35) * prod) * a4004
        a04 = ((al ** 2 - 1) ** 2 * (40 * al ** 3 + 123 * al ** 2 - 35)
               - 27 * (41 * al ** 4 - 8 * al ** 3 + 50 * al ** 2 - 35) * prod) * a4004
        bracket = ((297 * beta - 64)
                   + 3 * (297 * beta ** 2 - 527 * beta + 96) * m1 / beta
                   + (-1485 * beta ** 2 + 2504 * beta - 448) * m1 ** 2 / beta ** 2
                   + (891 * beta ** 2 - 1284 * beta + 224) * m1 ** 3 * (2 * beta + (1 - m1) ** 2) / beta ** 3)
        a22 = a4004 * bracket * 54 * beta ** 3 / (m2 * m3)
        a13 = ((beta + m3 * (3 * m3 - 2)) * (al + 3 * m1 - 1)
               * (8 * al ** 2 - al - 7 * al * d + m1 * (3 * al - 3 * d + 6) - 9 * m1 ** 2 + d - 1)
               * 35 * beta ** mp.mpf(5.5) * m3 / (4 * s3 * ka ** 4 * m1 ** 3 * m2 ** 3))
        a31 = -a13
        vals = [a30, a21, a12, a03, a40, a31, a22, a13, a04]
    return CubicQuarticCoeffs(*(float(v) for v in vals))


def numeric_cubic_quartic_coeffs(mp_: MassParameters, analysis: CentralConfigAnalysis | None = None
                                 ) -> CubicQuarticCoeffs:
    """The nine coefficients from analytic directional derivatives of the force function."""
    an = lagrange_analysis(mp_) if analysis is None else analysis
    tay = force_taylor(an)
    T3 = tay.cubic
    C4 = shape_force_quartic(tay)
    c3 = {(3, 0): T3[0, 0, 0] / 6, (2, 1): T3[0, 0, 1] / 2, (1, 2): T3[0, 1, 1] / 2, (0, 3): T3[1, 1, 1] / 6}
    c4 = _quartic_monomials(C4)
    return CubicQuarticCoeffs(c3[(3, 0)], c3[(2, 1)], c3[(1, 2)], c3[(0, 3)],
                              c4[(4, 0)], c4[(3, 1)], c4[(2, 2)], c4[(1, 3)], c4[(0, 4)])


def _quartic_monomials(C) -> dict:
    out: dict = {}
    for idx in np.ndindex(*C.shape):
        e = (idx.count(0), idx.count(1))
        out[e] = out.get(e, 0.0) + C[idx]
    return out


def _pq_vars(cap=4, chart="pq"):
    return [SparsePolynomial.variable(i, NVARS, cap, chart) for i in range(NVARS)]


def shape_potential_series(mp_: MassParameters, analysis: CentralConfigAnalysis | None = None,
                           cap=4) -> SparsePolynomial:
    """``U(z)`` through degree 4 as a polynomial in ``(q1, q2)`` embedded in the pq chart."""
    an = lagrange_analysis(mp_) if analysis is None else analysis
    tay = force_taylor(an)
    C4 = shape_force_quartic(tay)
    terms = {(0,) * NVARS: tay.lam}

    def add(e2, c):
        key = (0, 0, 0, 0, e2[0], e2[1])
        terms[key] = terms.get(key, 0.0) + c

    add((2, 0), 0.5 * tay.quad[0])
    add((0, 2), 0.5 * tay.quad[1])
    for idx in np.ndindex(2, 2, 2):
        add((idx.count(0), idx.count(1)), tay.cubic[idx] / 6.0)
    for e, c in _quartic_monomials(C4).items():
        add(e, c)
    return SparsePolynomial(NVARS, terms, cap, "pq")


def assemble_hamiltonian(mp_: MassParameters, source: str = "exact", cap: int = 4) -> SparsePolynomial:
    """Reduced Hamiltonian ``H(p, q)`` through total degree ``cap``.

    ``source="exact"`` expands the Legendre-transformed moving-frame
    Hamiltonian directly, with ``U`` taken from analytic derivatives of the
    force function. ``source="printed"`` assembles the quadratic, cubic and
    quartic blocks in closed form from :func:`cubic_quartic_coeffs`.
    """
    if source == "exact":
        return _exact_hamiltonian(mp_, cap)
    if source == "printed":
        return _closed_form_hamiltonian(mp_)
    raise ValueError(f"unknown source {source!r}")


def _exact_hamiltonian(mp_: MassParameters, cap: int) -> SparsePolynomial:
    w = mp_.beta ** 0.75
    p0, p1, p2, q0, q1, q2 = _pq_vars(cap)
    one = SparsePolynomial.constant(1.0, NVARS, cap, "pq")
    inv_r = binomial_series(q0, -1.0)
    inv_r2 = inv_r * inv_r
    rho2 = q1 * q1 + q2 * q2
    inv_s = geometric_series(rho2)               # 1 / z3^2
    ww = p1 * p1 + p2 * p2
    aw = p2 * q1 - p1 * q2                       # (Q z) . w
    kin = ((one - rho2) * ww + aw * aw * (2.0 * one - rho2) * inv_s
           - 2.0 * w * aw * inv_s + (w * w) * inv_s)
    U = shape_potential_series(mp_, cap=cap)
    H = 0.5 * p0 * p0 + 0.5 * inv_r2 * kin - U * inv_r - w * w * one
    return H


def _closed_form_hamiltonian(mp_: MassParameters) -> SparsePolynomial:
    w = mp_.beta ** 0.75
    al = mp_.alpha
    c = cubic_quartic_coeffs(mp_)
    p0, p1, p2, q0, q1, q2 = _pq_vars(4)
    one = SparsePolynomial.constant(1.0, NVARS, 4, "pq")
    w2 = w * w
    H2 = 0.5 * (p0 * p0 + p1 * p1 + p2 * p2 + 2 * w * (p1 * q2 - p2 * q1)
                + w2 * (q0 * q0 + (3 * al - 1) / 2 * q1 * q1 - (3 * al + 1) / 2 * q2 * q2))
    H3 = (2 * w * p2 * q1 * q0 - 2 * w * p1 * q2 * q0 - p2 * p2 * q0 - p1 * p1 * q0 - w2 * q0 ** 3
          - c.a03 * q2 ** 3 - c.a12 * q1 * q2 ** 2 - c.a21 * q1 ** 2 * q2 - c.a30 * q1 ** 3
          - w2 / 4 * q0 * ((3 * al + 1) * q1 * q1 + (1 - 3 * al) * q2 * q2))
    H4 = (1.5 * p1 * p1 * q0 * q0 + 1.5 * p2 * p2 * q0 * q0 - 0.5 * p1 * p1 * q1 * q1 + 0.5 * p2 * p2 * q1 * q1
          + 0.5 * p1 * p1 * q2 * q2 - 0.5 * p2 * p2 * q2 * q2 - 3 * w * p2 * q1 * q0 * q0 + 3 * w * p1 * q2 * q0 * q0
          - w * p2 * q1 ** 3 + w * p1 * q2 ** 3 - w * p2 * q1 * q2 * q2 + w * p1 * q1 * q1 * q2
          + 1.5 * w2 * q0 ** 4 - 2 * p1 * p2 * q2 * q1
          + c.a21 * q0 * q2 * q1 * q1 + c.a30 * q0 * q1 ** 3 + c.a12 * q0 * q1 * q2 * q2 + c.a03 * q0 * q2 ** 3
          - c.a31 * q2 * q1 ** 3 - c.a13 * q1 * q2 ** 3
          + (w2 / 2 - c.a04) * q2 ** 4 + (w2 / 2 - c.a40) * q1 ** 4 + (w2 - c.a22) * q1 * q1 * q2 * q2
          + 0.75 * w2 * q0 * q0 * ((al + 1) * q1 * q1 - (al - 1) * q2 * q2))
    return -1.5 * w2 * one + H2 + H3 + H4


def printed_quartic_block(mp_: MassParameters) -> SparsePolynomial:
    """The quartic block exactly as displayed in closed form, including its index slips.

    Kept for comparison only: the terms ``a12 q0 q2^3`` and ``a03 q0 q1 q2^2``
    appear with swapped coefficients relative to the expansion of ``-U/(1+q0)``.
    """
    c = cubic_quartic_coeffs(mp_)
    fixed = _closed_form_hamiltonian(mp_).homogeneous(4)
    _, _, _, q0, q1, q2 = _pq_vars(4)
    swap = (c.a03 - c.a12) * q0 * q1 * q2 * q2 + (c.a12 - c.a03) * q0 * q2 ** 3
    return fixed + swap


def quadratic_matrix(h: SparsePolynomial) -> np.ndarray:
    """Symmetric Hessian of the quadratic part of ``h``."""
    A = np.zeros((h.nvars, h.nvars), dtype=complex)
    for e, c in h.homogeneous(2).items():
        idx = [i for i, k in enumerate(e) for _ in range(k)]
        i, j = idx
        if i == j:
            A[i, i] += 2 * c
        else:
            A[i, j] += c
            A[j, i] += c
    return A


J6 = np.block([[np.zeros((3, 3)), -np.eye(3)], [np.eye(3), np.zeros((3, 3))]])


def symplectic_defect(T) -> float:
    """``max |T^T J T - J|`` for the canonical form ``J = (0 -I; I 0)``."""
    T = np.asarray(T)
    return float(np.max(np.abs(T.T @ J6 @ T - J6)))


def diagonalizing_matrix(mp_: MassParameters, fs: FrequencySet | None = None) -> np.ndarray:
    """Linear symplectic map ``(p, q) = T (x, y)`` bringing the quadratic part to diagonal form.

    Columns are ordered ``(x0, x1, x2, y0, y1, y2)``.
    """
    fs = frequencies(mp_) if fs is None else fs
    w0, w1, w2 = fs.omega0, fs.omega1, fs.omega2
    al = mp_.alpha
    g = float(np.sqrt(1 - 27 * mp_.beta))
    if g <= 1e-12:
        raise FrequencyCollisionError("gamma vanishes; the shape frequencies collide")
    d1 = -3 * al - g + 4
    d2 = -3 * al + g + 4
    s1 = np.sqrt(g * w1 / d1)
    s2 = np.sqrt(g * w2 / d2)
    T = np.zeros((6, 6))
    X0, X1, X2, Y0, Y1, Y2 = range(6)
    P0, P1, P2, Q0, Q1, Q2 = range(6)
    T[P0, X0] = np.sqrt(w0)
    T[Q0, Y0] = 1 / np.sqrt(w0)
    T[P1, X1] = w0 * (3 * al - g) / (4 * np.sqrt(2 * g * w1 / (4 - 3 * al - g)))
    T[P1, Y2] = w0 * (3 * al + g) / (4 * np.sqrt(2 * g * w2 / (4 - 3 * al + g)))
    T[P2, X2] = (g - 3 * al) * s2 / (np.sqrt(2) * g)
    T[P2, Y1] = -(3 * al + g) * s1 / (np.sqrt(2) * g)
    T[Q1, X2] = -2 * np.sqrt(2) * s2 / (g * w0)
    T[Q1, Y1] = -2 * np.sqrt(2) * s1 / (g * w0)
    T[Q2, X1] = 1 / (np.sqrt(2) * s1)
    T[Q2, Y2] = 1 / (np.sqrt(2) * s2)
    return T


def to_diagonal_real(h: SparsePolynomial, fs: FrequencySet, mp_: MassParameters) -> SparsePolynomial:
    """Apply the real symplectic change ``(p, q) -> (x, y)``."""
    if h.chart not in (None, "pq"):
        raise ValueError(f"expected a pq-chart polynomial, got {h.chart!r}")
    T = diagonalizing_matrix(mp_, fs)
    return h.linear_change(T, chart="xy")


_S2 = 1 / np.sqrt(2)
COMPLEXIFY = np.block([[_S2 * np.eye(3), 1j * _S2 * np.eye(3)],
                       [1j * _S2 * np.eye(3), _S2 * np.eye(3)]])


def complexify(h: SparsePolynomial) -> SparsePolynomial:
    """``x = (zeta + i eta)/sqrt2``, ``y = (eta + i zeta)/sqrt2``."""
    if h.chart not in (None, "xy"):
        raise ValueError(f"expected an xy-chart polynomial, got {h.chart!r}")
    return h.linear_change(COMPLEXIFY, chart="zeta_eta")


def decomplexify(h: SparsePolynomial) -> SparsePolynomial:
    if h.chart not in (None, "zeta_eta"):
        raise ValueError(f"expected a zeta_eta-chart polynomial, got {h.chart!r}")
    return h.linear_change(np.linalg.inv(COMPLEXIFY), chart="xy")


def reality_defect(h: SparsePolynomial) -> float:
    """Largest violation of ``f_{k,l} = i^{|k+l|} conj(f_{l,k})`` over all terms."""
    worst = 0.0
    for e, c in h.items():
        k, l = e[:3], e[3:]
        other = h[l + k]
        worst = max(worst, abs(c - (1j ** sum(e)) * np.conj(other)))
    return worst
