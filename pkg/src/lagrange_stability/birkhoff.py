"""Degree-4 Birkhoff normalization by a mixed-variable generating function.

The input is the complexified Hamiltonian in the ``zeta_eta`` chart, whose
quadratic part is ``sum_j i w_j zeta_j eta_j`` with the signed frequency
vector ``w = (omega0, -omega1, omega2)``. The generating function
``u . eta + S3(u, eta) + S4(u, eta)`` defines ``zeta = u + dS/deta`` and
``v = eta + dS/du``. Monomials ``u^k eta^l`` are killed by dividing by
``i <w, l - k>``; the surviving ``k == l`` quartic terms give the normal form

    H = i w.(u v) - 1/2 sum_jk omega_jk (u_j v_j)(u_k v_k),

i.e. ``omega_jj = -2 c_jj`` and ``omega_jk = -c_jk`` for the coefficient
``c`` of ``(u_j eta_j)(u_k eta_k)``.

The homological steps run in extended precision (``NORMALIZE_DPS`` digits):
the quartic coefficients grow like ``1 / (m1 m2 m3)``, and a double-precision
``S4`` cannot satisfy the defining identity much better than
``1e-16 * |H4|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import mpmath
import numpy as np

from .hamiltonian import (FrequencySet, MassParameters, assemble_hamiltonian, complexify,
                          frequencies, to_diagonal_real)
from .polynomial import SparsePolynomial

SMALL_DENOMINATOR = 1e-8
IMAG_TOL = 1e-9
NDOF = 3
NORMALIZE_DPS = 30


class ResonanceError(ValueError):
    """A small denominator ``<w, l - k>`` was met during normalization.

    Attributes
    ----------
    exponent_difference : tuple
        ``l - k`` for the offending monomial ``u^k eta^l``.
    relation : tuple
        The same vector written as a relation ``k0 omega0 + k1 omega1 + k2 omega2 = 0``
        between unsigned frequencies, reduced to a primitive vector.
    """

    def __init__(self, exponent_difference, relation, denominator):
        self.exponent_difference = tuple(int(v) for v in exponent_difference)
        self.relation = tuple(int(v) for v in relation)
        self.denominator = float(denominator)
        super().__init__(f"small denominator {denominator:.3e} for relation {self.relation} "
                         f"(exponent difference {self.exponent_difference})")


class NonRealNormalFormError(ArithmeticError):
    """Normal-form coefficients have an imaginary part beyond tolerance."""


def primitive_relation(vec) -> tuple:
    """Divide by the gcd and make the first nonzero entry positive."""
    v = [int(x) for x in vec]
    g = 0
    for x in v:
        g = gcd(g, abs(x))
    if g == 0:
        return tuple(v)
    v = [x // g for x in v]
    first = next(x for x in v if x != 0)
    return tuple(-x for x in v) if first < 0 else tuple(v)


def signed_to_relation(diff) -> tuple:
    """Convert an exponent difference (signed frequencies) to an unsigned-frequency relation."""
    d0, d1, d2 = diff
    return primitive_relation((d0, -d1, d2))


@dataclass(frozen=True)
class GeneratingFunction:
    S3: SparsePolynomial
    S4: SparsePolynomial


@dataclass(frozen=True)
class NormalFormQuadratic:
    """Symmetric matrix ``omega_jk`` of the quartic normal form and the linear frequencies."""

    omega: np.ndarray
    linear: FrequencySet
    imag_residual: float = 0.0

    def entry(self, j, k) -> float:
        return float(self.omega[j, k])

    def to_dict(self) -> dict:
        names = {}
        for j in range(NDOF):
            for k in range(j, NDOF):
                names[f"omega{j}{k}"] = float(self.omega[j, k])
        names.update(omega0=self.linear.omega0, omega1=self.linear.omega1, omega2=self.linear.omega2,
                     mu1=self.linear.mu1, mu2=self.linear.mu2)
        return names


@dataclass(frozen=True)
class NormalizationResult:
    normal_form: NormalFormQuadratic
    generating: GeneratingFunction
    h3: SparsePolynomial
    h4: SparsePolynomial
    h34: SparsePolynomial
    resonant: SparsePolynomial
    residual3: float
    residual4: float
    signed: np.ndarray = field(repr=False)


def _signed_vector(fs: FrequencySet, signed=None):
    if signed is None:
        return fs.signed
    if any(isinstance(x, mpmath.mpf) for x in signed):
        return list(signed)
    return np.asarray(signed, dtype=float)


def _pairing(signed, diff):
    """``<w, diff>``; exact integer weights keep mpmath precision when ``w`` is mpf."""
    return sum(w * int(d) for w, d in zip(signed, diff))


def homological_operator(S: SparsePolynomial, signed) -> SparsePolynomial:
    """``sum_j i w_j (eta_j dS/deta_j - u_j dS/du_j)``, evaluated monomial-wise."""
    out = {}
    for e, c in S.items():
        d = np.asarray(e[NDOF:]) - np.asarray(e[:NDOF])
        out[e] = 1j * _pairing(signed, d) * c
    return SparsePolynomial(S.nvars, out, S.degree_cap, S.chart)


def _solve(G: SparsePolynomial, signed, scale, keep_resonant: bool):
    """Kill every non-resonant monomial of ``G``; return ``(S, resonant part)``."""
    s_terms, r_terms = {}, {}
    for e, c in G.items():
        k, l = np.asarray(e[:NDOF]), np.asarray(e[NDOF:])
        if keep_resonant and np.array_equal(k, l):
            r_terms[e] = c
            continue
        d = _pairing(signed, l - k)
        if abs(d) < SMALL_DENOMINATOR * scale:
            raise ResonanceError(l - k, signed_to_relation(l - k), float(d))
        s_terms[e] = 1j * c / d
    S = SparsePolynomial(G.nvars, s_terms, G.degree_cap, G.chart)
    R = SparsePolynomial(G.nvars, r_terms, G.degree_cap, G.chart)
    return S, R


def solve_homological_3(h3: SparsePolynomial, fs: FrequencySet, signed=None) -> SparsePolynomial:
    """Cubic generating term: ``L(S3) + H3 = 0``."""
    w = _signed_vector(fs, signed)
    S3, _ = _solve(h3.homogeneous(3), w, fs.omega0, keep_resonant=False)
    return S3


def cubic_to_quartic(h3: SparsePolynomial, s3: SparsePolynomial) -> SparsePolynomial:
    """Quartic part of ``H3(u + dS3/deta, eta)``."""
    out = SparsePolynomial.zero(h3.nvars, h3.degree_cap, h3.chart)
    for j in range(NDOF):
        out = out + h3.diff(j) * s3.diff(NDOF + j)
    return out.homogeneous(4)


def resonant_to_omega(resonant: SparsePolynomial):
    """Read ``omega_jk`` off the action monomials; returns ``(real matrix, max imaginary part)``."""
    om = np.zeros((NDOF, NDOF), dtype=complex)
    for e, c in resonant.items():
        c = complex(c)
        k = e[:NDOF]
        idx = [j for j in range(NDOF) for _ in range(k[j])]
        j, m = idx
        if j == m:
            om[j, j] = -2 * c
        else:
            om[j, m] = om[m, j] = -c
    return om.real.copy(), float(np.max(np.abs(om.imag)))


def solve_homological_4(h3: SparsePolynomial, s3: SparsePolynomial, h4: SparsePolynomial,
                        fs: FrequencySet, signed=None, check_real=True):
    """Quartic step: ``L(S4) + H3->4 + H4 = calH4`` with ``calH4`` resonant.

    Returns ``(S4, NormalFormQuadratic)``.
    """
    w = _signed_vector(fs, signed)
    h34 = cubic_to_quartic(h3, s3)
    G = h4.homogeneous(4) + h34
    S4, R = _solve(G, w, fs.omega0, keep_resonant=True)
    omega, imag = resonant_to_omega(R)
    scale = max(1.0, float(np.max(np.abs(omega))))
    if check_real and imag > IMAG_TOL * scale:
        raise NonRealNormalFormError(f"normal form has imaginary part {imag:.3e}")
    return S4, NormalFormQuadratic(omega, fs, imag)


def residual_order3(h3, s3, fs: FrequencySet, signed=None) -> float:
    w = _signed_vector(fs, signed)
    return (homological_operator(s3, w) + h3.homogeneous(3)).max_abs()


def residual_order4(h3, s3, h4, s4, resonant, fs: FrequencySet, signed=None) -> float:
    w = _signed_vector(fs, signed)
    lhs = homological_operator(s4, w) + cubic_to_quartic(h3, s3) + h4.homogeneous(4) - resonant
    return lhs.max_abs()


def normal_form_polynomial(nf: NormalFormQuadratic, nvars=6, cap=4, chart="zeta_eta") -> SparsePolynomial:
    """``i w.(u v) - 1/2 sum omega_jk (u_j v_j)(u_k v_k)`` as a polynomial."""
    w = nf.linear.signed
    terms = {}
    for j in range(NDOF):
        e = [0] * nvars
        e[j] = e[NDOF + j] = 1
        terms[tuple(e)] = 1j * w[j]
        for k in range(NDOF):
            e2 = [0] * nvars
            e2[j] += 1
            e2[k] += 1
            e2[NDOF + j] += 1
            e2[NDOF + k] += 1
            terms[tuple(e2)] = terms.get(tuple(e2), 0) - 0.5 * nf.omega[j, k]
    return SparsePolynomial(nvars, terms, cap, chart)


def generating_identity_residual(h: SparsePolynomial, nf: NormalFormQuadratic,
                                 gen: GeneratingFunction) -> float:
    """Max coefficient of ``H(u + dS/deta, eta) - calH(u, eta + dS/du)`` through degree 4.

    Independent of the graded bookkeeping used to build ``S3``, ``S4``.
    """
    S = gen.S3 + gen.S4
    n, cap, chart = h.nvars, h.degree_cap, h.chart
    var = [SparsePolynomial.variable(i, n, cap, chart) for i in range(n)]
    zeta = [var[j] + S.diff(NDOF + j) for j in range(NDOF)]
    lhs = h.compose(zeta + var[NDOF:], chart=chart)
    v = [var[NDOF + j] + S.diff(j) for j in range(NDOF)]
    rhs = normal_form_polynomial(nf, n, cap, chart).compose(var[:NDOF] + v, chart=chart)
    diff = lhs - rhs
    # drop the constant
    diff = diff - SparsePolynomial.constant(diff[(0,) * n], n, cap, chart)
    return diff.max_abs()


def normalize(h_zeta: SparsePolynomial, fs: FrequencySet, signed=None, check_real=True,
              dps: int | None = NORMALIZE_DPS) -> NormalizationResult:
    """Run both homological steps on a complexified Hamiltonian.

    With ``dps`` set, the input coefficients are converted exactly to mpmath
    numbers and all polynomial work is done at that many digits; ``dps=None``
    stays in double precision.
    """
    if h_zeta.chart not in (None, "zeta_eta"):
        raise ValueError(f"normalization expects the zeta_eta chart, got {h_zeta.chart!r}")
    if dps is None:
        return _normalize(h_zeta, fs, _signed_vector(fs, signed), check_real)
    with mpmath.workdps(dps):
        w = [mpmath.mpf(float(x)) for x in _signed_vector(fs, signed)]
        return _normalize(h_zeta.to_mp(), fs, w, check_real)


def _normalize(h_zeta, fs, w, check_real) -> NormalizationResult:
    h3 = h_zeta.homogeneous(3)
    h4 = h_zeta.homogeneous(4)
    s3 = solve_homological_3(h3, fs, w)
    s4, nf = solve_homological_4(h3, s3, h4, fs, w, check_real=check_real)
    h34 = cubic_to_quartic(h3, s3)
    G = h4 + h34
    resonant = SparsePolynomial(G.nvars, {e: c for e, c in G.items() if e[:NDOF] == e[NDOF:]},
                                G.degree_cap, G.chart)
    r3 = residual_order3(h3, s3, fs, w)
    r4 = residual_order4(h3, s3, h4, s4, resonant, fs, w)
    return NormalizationResult(nf, GeneratingFunction(s3, s4), h3, h4, h34, resonant, r3, r4,
                               np.array([float(x) for x in w]))


def complexified_hamiltonian(mp_: MassParameters, source="exact"):
    fs = frequencies(mp_)
    h = assemble_hamiltonian(mp_, source=source)
    return complexify(to_diagonal_real(h, fs, mp_)), fs


def birkhoff_normal_form(mp_: MassParameters, source="exact") -> NormalizationResult:
    """Full pipeline from masses to the degree-4 normal form."""
    hz, fs = complexified_hamiltonian(mp_, source)
    return normalize(hz, fs)


# closed forms ---------------------------------------------------------------

def closed_form_omega_arrays(beta, m1, dtype=np.longdouble):
    """Closed-form ``omega_jk`` on arrays of ``(beta, m1)``.

    Evaluated in extended precision (``long double``). Returns a dict with keys
    ``"00", "01", "02", "11", "12", "22"``.
    """
    b = np.asarray(beta, dtype=dtype)
    m1 = np.asarray(m1, dtype=dtype)
    P = m1 * (b - m1 * (1 - m1))          # m1 m2 m3
    g = np.sqrt(1 - 27 * b)
    one = np.ones_like(b * m1)
    w00 = -3 * one
    w01 = -(np.sqrt(g + 1) * (21 * g ** 3 - 40 * g ** 2 + 15 * g + 4)
            / (12 * np.sqrt(dtype(6)) * np.sqrt(b) * g * (2 * g - 1))) * one
    w02 = -(np.sqrt(g + 1) * (21 * g ** 2 + 19 * g - 4) / (4 * np.sqrt(dtype(2)) * g * (2 * g + 1))) * one
    w11 = ((g - 1) * (1211 * g ** 4 - 1336 * g ** 3 + 279 * g ** 2 + 158 * g - 76)
           / (72 * g ** 2 * (10 * g ** 2 - 11 * g + 3))
           - 3 * b ** 3 * (31 * g ** 2 + 286 * g - 236) / (8 * (g - 1) * g ** 2 * (5 * g - 3) * P))
    w22 = (-(g + 1) * (1211 * g ** 4 + 1336 * g ** 3 + 279 * g ** 2 - 158 * g - 76)
           / (72 * g ** 2 * (10 * g ** 2 + 11 * g + 3))
           - 3 * b ** 3 * (31 * g ** 2 - 286 * g - 236) / (8 * g ** 2 * (g + 1) * (5 * g + 3) * P))
    c = 360855 * b ** 2 - 32265 * b + 624
    w12 = (np.sqrt(3 * b) / (4 * (18225 * b ** 2 - 1107 * b + 16) * P)
           * (c * m1 ** 3 - c * m1 ** 2 + 3 * b * (120285 * b ** 2 - 10755 * b + 208) * m1
              - 4 * b ** 2 * (432 * b + 43)))
    return {"00": w00, "01": w01, "02": w02, "11": w11, "12": w12, "22": w22}


def omega_matrix_from_arrays(d: dict, index=()) -> np.ndarray:
    return np.array([[d["00"][index], d["01"][index], d["02"][index]],
                     [d["01"][index], d["11"][index], d["12"][index]],
                     [d["02"][index], d["12"][index], d["22"][index]]], dtype=float)


def closed_form_omegas(mp_: MassParameters) -> NormalFormQuadratic:
    """Closed-form normal-form matrix at a mass point."""
    fs = frequencies(mp_)
    g = np.sqrt(1 - 27 * mp_.beta)
    # the two third-order resonances make the closed forms singular
    for bad, rel in ((0.5, (1, -2, 0)), (0.6, (0, 2, -1))):
        if abs(g - bad) < 1e-12:
            raise ResonanceError(rel, rel, float(np.dot(rel, fs.unsigned)))
    d = closed_form_omega_arrays(mp_.beta, mp_.m1)
    return NormalFormQuadratic(omega_matrix_from_arrays(d), fs)


class ActionQuadratic:
    """``H2(rho) = w . rho + 1/2 rho^T W rho`` with ``w`` the signed frequencies."""

    def __init__(self, nf: NormalFormQuadratic):
        self.W = np.array(nf.omega, dtype=float)
        self.w = nf.linear.signed

    def __call__(self, rho) -> float:
        rho = np.asarray(rho, dtype=float)
        return float(self.w @ rho + 0.5 * rho @ self.W @ rho)

    def gradient(self, rho) -> np.ndarray:
        return self.w + self.W @ np.asarray(rho, dtype=float)

    def hessian(self, rho=None) -> np.ndarray:
        return self.W.copy()

    def critical_point(self) -> np.ndarray:
        """Solution of ``W rho = -w``."""
        return np.linalg.solve(self.W, -self.w)


def action_angle_form(nf: NormalFormQuadratic) -> ActionQuadratic:
    return ActionQuadratic(nf)
