"""Planar N-body machinery in the mass metric.

Configurations are flat arrays ``(x1, y1, x2, y2, ...)`` of length ``2N``.
The force function is ``U(r) = sum_{k<j} m_k m_j / r_jk`` and all inner
products use the mass matrix ``diag(m1, m1, ..., mN, mN)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import brentq

CENTRAL_TOL = 1e-9


class CollisionError(ValueError):
    """Two bodies share a position."""


class NonCentralConfigurationError(ValueError):
    """Configuration fails the central-configuration test."""


class DegenerateCentralConfigurationError(ValueError):
    """Kernel of the normalized Hessian is larger than the rotation/scaling plane."""


class NormalizationError(ValueError):
    """Masses or configuration are not in the normalized form required."""


def check_masses(masses, normalized=False) -> np.ndarray:
    m = np.asarray(masses, dtype=float).ravel()
    if m.size < 2:
        raise ValueError("need at least two masses")
    if np.any(~np.isfinite(m)) or np.any(m <= 0):
        raise ValueError(f"masses must be positive and finite, got {m}")
    if normalized and abs(m.sum() - 1.0) > 1e-12:
        raise NormalizationError(f"total mass must be 1, got {m.sum()!r}")
    return m


def normalize_masses(masses) -> np.ndarray:
    m = check_masses(masses)
    return m / m.sum()


def _as_config(r, n):
    r = np.asarray(r, dtype=float).ravel()
    if r.size != 2 * n:
        raise ValueError(f"configuration has {r.size} coordinates, expected {2 * n}")
    return r


def mass_matrix(masses) -> np.ndarray:
    return np.diag(np.repeat(check_masses(masses), 2))


def translation_generators(n: int):
    """The two translation directions ``E1 = (1,0,...,1,0)`` and ``E2 = E1^perp``."""
    e1 = np.tile([1.0, 0.0], n)
    e2 = np.tile([0.0, 1.0], n)
    return e1, e2


def perp(r) -> np.ndarray:
    """Rotate every body by +90 degrees: ``(x, y) -> (-y, x)``."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    out[..., 0::2] = -r[..., 1::2]
    out[..., 1::2] = r[..., 0::2]
    return out


def mass_inner_product(a, b, masses) -> float:
    m = check_masses(masses)
    a = _as_config(a, m.size)
    b = _as_config(b, m.size)
    return float(np.dot(a * np.repeat(m, 2), b))


def mass_norm(r, masses) -> float:
    return float(np.sqrt(mass_inner_product(r, r, masses)))


def center_of_mass(r, masses) -> np.ndarray:
    m = check_masses(masses)
    pos = _as_config(r, m.size).reshape(-1, 2)
    return (m[:, None] * pos).sum(axis=0) / m.sum()


def is_centered(r, masses, tol=1e-12) -> bool:
    return bool(np.all(np.abs(center_of_mass(r, masses)) <= tol))


def pair_vectors(r, n):
    pos = _as_config(r, n).reshape(n, 2)
    pairs = list(combinations(range(n), 2))
    d = np.array([pos[j] - pos[i] for i, j in pairs])
    return pairs, d


def min_distance(r, n) -> float:
    _, d = pair_vectors(r, n)
    return float(np.min(np.linalg.norm(d, axis=1)))


def _checked_pairs(r, m):
    pairs, d = pair_vectors(r, m.size)
    dist = np.linalg.norm(d, axis=1)
    if np.any(dist <= 0):
        raise CollisionError("collision: some pairwise distance is zero")
    return pairs, d, dist


def force_function(r, masses) -> float:
    """Opposite of the potential energy, ``sum m_k m_j / r_jk``."""
    m = check_masses(masses)
    pairs, _, dist = _checked_pairs(r, m)
    mm = np.array([m[i] * m[j] for i, j in pairs])
    return float(np.sum(mm / dist))


def moment_of_inertia(r, masses) -> float:
    m = check_masses(masses)
    pos = _as_config(r, m.size).reshape(-1, 2) - center_of_mass(r, m)
    return float(np.sum(m * np.sum(pos ** 2, axis=1)))


def force_gradient(r, masses) -> np.ndarray:
    """Euclidean gradient of the force function."""
    m = check_masses(masses)
    pairs, d, dist = _checked_pairs(r, m)
    g = np.zeros((m.size, 2))
    for (i, j), dij, rij in zip(pairs, d, dist):
        f = m[i] * m[j] * dij / rij ** 3
        g[i] += f
        g[j] -= f
    return g.ravel()


def mass_gradient(r, masses) -> np.ndarray:
    """Gradient with respect to the mass inner product, ``M^{-1} grad U``."""
    m = check_masses(masses)
    return force_gradient(r, m) / np.repeat(m, 2)


def force_hessian(r, masses) -> np.ndarray:
    """Euclidean Hessian of the force function (the matrix B in block form)."""
    m = check_masses(masses)
    n = m.size
    pairs, d, dist = _checked_pairs(r, m)
    B = np.zeros((2 * n, 2 * n))
    for (i, j), dij, rij in zip(pairs, d, dist):
        blk = m[i] * m[j] / rij ** 3 * (np.eye(2) - 3.0 * np.outer(dij, dij) / rij ** 2)
        B[2 * i:2 * i + 2, 2 * j:2 * j + 2] += blk
        B[2 * j:2 * j + 2, 2 * i:2 * i + 2] += blk
        B[2 * i:2 * i + 2, 2 * i:2 * i + 2] -= blk
        B[2 * j:2 * j + 2, 2 * j:2 * j + 2] -= blk
    return B


def force_derivative(r, masses, *directions) -> float:
    """Directional derivative ``d^k U(r)[v1, ..., vk]`` for ``k = 0..4``.

    Uses the closed-form derivatives of ``1/|d|`` pair by pair.
    """
    k = len(directions)
    if k > 4:
        raise ValueError("derivatives above order 4 are not implemented")
    m = check_masses(masses)
    n = m.size
    pairs, d, dist = _checked_pairs(r, m)
    dirs = [_as_config(v, n).reshape(n, 2) for v in directions]
    total = 0.0
    for p, ((i, j), dij, s) in enumerate(zip(pairs, d, dist)):
        us = [v[j] - v[i] for v in dirs]
        du = [float(dij @ u) for u in us]
        mm = m[i] * m[j]
        if k == 0:
            val = 1.0 / s
        elif k == 1:
            val = -du[0] / s ** 3
        elif k == 2:
            val = -(us[0] @ us[1]) / s ** 3 + 3.0 * du[0] * du[1] / s ** 5
        elif k == 3:
            u, v, w = us
            a, b, c = du
            val = (3.0 * ((u @ v) * c + (u @ w) * b + (v @ w) * a) / s ** 5
                   - 15.0 * a * b * c / s ** 7)
        else:
            u, v, w, x = us
            a, b, c, e = du
            val = (3.0 * ((u @ v) * (w @ x) + (u @ w) * (v @ x) + (u @ x) * (v @ w)) / s ** 5
                   - 15.0 * ((u @ v) * c * e + (u @ w) * b * e + (u @ x) * b * c
                             + (v @ w) * a * e + (v @ x) * a * c + (w @ x) * a * b) / s ** 7
                   + 105.0 * a * b * c * e / s ** 9)
        total += mm * val
    return float(total)


def third_derivative_tensor(r, masses, basis) -> np.ndarray:
    """Symmetric tensor ``T[i,j,k] = d^3 U(r)[b_i, b_j, b_k]`` for the columns of ``basis``."""
    m = check_masses(masses)
    n = m.size
    pairs, d, dist = _checked_pairs(r, m)
    basis = np.asarray(basis, dtype=float)
    nb = basis.shape[1]
    T = np.zeros((nb, nb, nb))
    cols = basis.T.reshape(nb, n, 2)
    for (i, j), dij, s in zip(pairs, d, dist):
        U = cols[:, j, :] - cols[:, i, :]          # (nb, 2) relative displacements
        a = U @ dij                                # (nb,)
        G = U @ U.T                                # (nb, nb)
        t = 3.0 * (np.einsum("ij,k->ijk", G, a) + np.einsum("ik,j->ijk", G, a)
                   + np.einsum("jk,i->ijk", G, a)) / s ** 5
        t -= 15.0 * np.einsum("i,j,k->ijk", a, a, a) / s ** 7
        T += m[i] * m[j] * t
    return T


def fourth_derivative_tensor(r, masses, basis) -> np.ndarray:
    """Symmetric tensor of fourth directional derivatives along ``basis`` columns."""
    m = check_masses(masses)
    n = m.size
    pairs, d, dist = _checked_pairs(r, m)
    basis = np.asarray(basis, dtype=float)
    nb = basis.shape[1]
    T = np.zeros((nb,) * 4)
    cols = basis.T.reshape(nb, n, 2)
    for (i, j), dij, s in zip(pairs, d, dist):
        U = cols[:, j, :] - cols[:, i, :]
        a = U @ dij
        G = U @ U.T
        t = 3.0 * (np.einsum("ij,kl->ijkl", G, G) + np.einsum("ik,jl->ijkl", G, G)
                   + np.einsum("il,jk->ijkl", G, G)) / s ** 5
        t -= 15.0 * (np.einsum("ij,k,l->ijkl", G, a, a) + np.einsum("ik,j,l->ijkl", G, a, a)
                     + np.einsum("il,j,k->ijkl", G, a, a) + np.einsum("jk,i,l->ijkl", G, a, a)
                     + np.einsum("jl,i,k->ijkl", G, a, a) + np.einsum("kl,i,j->ijkl", G, a, a)) / s ** 7
        t += 105.0 * np.einsum("i,j,k,l->ijkl", a, a, a, a) / s ** 9
        T += m[i] * m[j] * t
    return T


def central_config_residual(r, masses) -> float:
    """Mass-metric norm of ``grad U + lambda r`` with ``lambda = U / I``."""
    m = check_masses(masses)
    r = _as_config(r, m.size)
    lam = force_function(r, m) / moment_of_inertia(r, m)
    res = mass_gradient(r, m) + lam * r
    return mass_norm(res, m)


@dataclass(frozen=True)
class CentralConfigAnalysis:
    """Spectral data of the linearized gradient at a normalized central configuration.

    ``basis`` columns are mass-orthonormal eigenvectors ``E1..E2N`` with
    ``E1, E2`` translations, ``E3 = r`` and ``E4 = r^perp``; ``Q[j, k] =
    <E_{j+5}, E_{k+5}^perp>``.
    """

    lam: float
    eigenvalues: np.ndarray
    basis: np.ndarray
    Q: np.ndarray
    masses: np.ndarray
    config: np.ndarray
    D: np.ndarray = field(repr=False)

    @property
    def n_bodies(self) -> int:
        return self.masses.size

    @property
    def shape_eigenvalues(self) -> np.ndarray:
        """``lambda_5 .. lambda_2N``."""
        return self.eigenvalues[4:]

    @property
    def shape_basis(self) -> np.ndarray:
        return self.basis[:, 4:]


def linearized_gradient(r, masses) -> np.ndarray:
    """The matrix ``D = lam + M^{-1}B - 3 lam x x^T M`` at a unit-norm configuration."""
    m = check_masses(masses)
    r = _as_config(r, m.size)
    mdiag = np.repeat(m, 2)
    lam = force_function(r, m)
    B = force_hessian(r, m)
    return lam * np.eye(r.size) + B / mdiag[:, None] - 3.0 * lam * np.outer(r, r * mdiag)


def analyze_central_config(r, masses, tol=CENTRAL_TOL, reference=None) -> CentralConfigAnalysis:
    """Eigen-decomposition of the linearized gradient at a central configuration.

    Parameters
    ----------
    r : array_like
        Centered configuration with unit mass norm.
    masses : array_like
        Positive masses with total 1.
    tol : float
        Accepted central-configuration residual.
    reference : sequence of array_like, optional
        Vectors fixing the signs of ``E5, E6, ...`` (``<ref, E_k> > 0``).
        Without it the largest component of each vector is made positive.
        For three bodies ``E6`` is always ``E5^perp``.
    """
    m = check_masses(masses, normalized=True)
    n = m.size
    r = _as_config(r, n)
    if not is_centered(r, m, tol=1e-10):
        raise NormalizationError("configuration is not centered")
    if abs(mass_norm(r, m) - 1.0) > 1e-10:
        raise NormalizationError(f"configuration must have unit mass norm, got {mass_norm(r, m)!r}")
    if n >= 3 and n * 2 - 4 <= 0:
        raise ValueError("need at least three bodies for shape coordinates")
    res = central_config_residual(r, m)
    if res > tol:
        raise NonCentralConfigurationError(f"central-configuration residual {res:.3e} exceeds {tol:.1e}")
    lam = force_function(r, m)  # I = 1
    D = linearized_gradient(r, m)
    mdiag = np.repeat(m, 2)
    sq = np.sqrt(mdiag)

    e1, e2 = translation_generators(n)
    pinned = [e1 / np.sqrt(m.sum()), e2 / np.sqrt(m.sum()), r.copy(), perp(r)]
    # Symmetrized operator M^{1/2} D M^{-1/2}; pinned vectors are orthonormal after the M^{1/2} map.
    Ds = (sq[:, None] * D) / sq[None, :]
    Ds = 0.5 * (Ds + Ds.T)
    P = np.column_stack([sq * v for v in pinned])
    # orthonormal complement of the pinned directions
    U_full, _, _ = np.linalg.svd(np.eye(2 * n) - P @ P.T)
    C = U_full[:, :2 * n - 4]
    evals, evecs = np.linalg.eigh(C.T @ Ds @ C)
    shape_vecs = (C @ evecs) / sq[:, None]

    scale = max(abs(lam), 1.0)
    if np.any(np.abs(evals) <= 1e-9 * scale):
        raise DegenerateCentralConfigurationError(
            "kernel of the normalized Hessian is larger than span{E3, E4}")

    cols = []
    for k in range(shape_vecs.shape[1]):
        v = shape_vecs[:, k]
        if reference is not None and k < len(reference) and reference[k] is not None:
            s = mass_inner_product(reference[k], v, m)
            v = v if s >= 0 else -v
        else:
            idx = int(np.argmax(np.abs(v) > np.abs(v).max() - 1e-12))
            v = v if v[idx] >= 0 else -v
        cols.append(v)
    if n == 3:
        cols[1] = perp(cols[0])
    basis = np.column_stack(pinned + cols)
    eigenvalues = np.concatenate([[lam, lam, 0.0, 0.0], evals])

    Q = np.array([[mass_inner_product(cj, perp(ck), m) for ck in cols] for cj in cols])
    return CentralConfigAnalysis(lam=float(lam), eigenvalues=eigenvalues, basis=basis, Q=Q,
                                 masses=m, config=r, D=D)


@dataclass(frozen=True)
class ForceTaylorData:
    """Taylor data of ``U(z) = lam + 1/2 sum lam_k z_k^2 + 1/6 sum a_ijk z_i z_j z_k + ...``."""

    lam: float
    quad: np.ndarray
    cubic: np.ndarray
    quartic: np.ndarray | None = None


def force_taylor(analysis: CentralConfigAnalysis, r=None, masses=None, quartic=True) -> ForceTaylorData:
    """Cubic (and optionally quartic) derivative tensors of ``U`` along ``E5..E2N``."""
    r = analysis.config if r is None else _as_config(r, analysis.n_bodies)
    m = analysis.masses if masses is None else check_masses(masses, normalized=True)
    shape = analysis.shape_basis
    cubic = third_derivative_tensor(r, m, shape)
    q4 = fourth_derivative_tensor(r, m, shape) if quartic else None
    return ForceTaylorData(lam=analysis.lam, quad=analysis.shape_eigenvalues.copy(), cubic=cubic, quartic=q4)


def shape_force_quartic(taylor: ForceTaylorData) -> np.ndarray:
    """Coefficient tensor of the quartic part of ``U(z)``.

    ``U_4(z) = sum_{ijkl} C[i,j,k,l] z_i z_j z_k z_l`` including the curvature
    of the sphere ``z3 = sqrt(1 - |z|^2)``.
    """
    if taylor.quartic is None:
        raise ValueError("quartic tensor not computed")
    n = taylor.quad.size
    lam = taylor.lam
    eye = np.eye(n)
    C = taylor.quartic / 24.0
    C = C + 3.0 * lam / 8.0 * np.einsum("ij,kl->ijkl", eye, eye)
    C = C + 0.75 * np.einsum("ij,kl->ijkl", eye, np.diag(taylor.quad - lam))
    return C


def equilateral_configuration(masses) -> np.ndarray:
    """Centered equilateral triangle with unit mass norm (total mass 1)."""
    m1, m2, m3 = check_masses(masses, normalized=True)
    beta = m1 * m2 + m2 * m3 + m3 * m1
    sb = 2.0 * np.sqrt(beta)
    s3 = np.sqrt(3.0)
    return np.array([-s3 * m3 / sb, (2 * m2 + m3) / sb,
                     -s3 * m3 / sb, -(2 * m1 + m3) / sb,
                     s3 * (m1 + m2) / sb, -(m1 - m2) / sb])


def euler_configuration(masses) -> np.ndarray:
    """Collinear central configuration with body 2 between bodies 1 and 3.

    The spacing ratio ``xi = (x3 - x2) / (x2 - x1)`` is found by bracketing;
    the result is centered and scaled to unit mass norm.
    """
    m = check_masses(masses, normalized=True)
    if m.size != 3:
        raise ValueError("Euler configurations are implemented for three bodies")
    m1, m2, m3 = m

    def mismatch(xi):
        a1 = m2 + m3 / (1 + xi) ** 2
        a2 = -m1 + m3 / xi ** 2
        a3 = -m1 / (1 + xi) ** 2 - m2 / xi ** 2
        return (a3 - a2) - xi * (a2 - a1)

    xi = brentq(mismatch, 1e-6, 1e6, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    x = np.array([0.0, 1.0, 1.0 + xi])
    x -= np.dot(m, x)
    x /= np.sqrt(np.dot(m, x ** 2))
    r = np.zeros(6)
    r[0::2] = x
    return r
