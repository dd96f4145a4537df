"""Input validation shared by the estimator layer."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .hamiltonian import omega_membership


def masses_to_beta_m1(M) -> np.ndarray:
    """Rows of positive masses ``(m1, m2, m3)`` to rows ``(beta, m1)`` after normalization.

    The largest mass is taken as ``m1``.
    """
    M = np.asarray(M, dtype=float)
    if np.any(M <= 0):
        raise ValueError("masses must be positive")
    M = np.sort(M / M.sum(axis=1, keepdims=True), axis=1)[:, ::-1]
    beta = M[:, 0] * M[:, 1] + M[:, 1] * M[:, 2] + M[:, 2] * M[:, 0]
    return np.column_stack([beta, M[:, 0]])


def check_mass_points(X, require_omega: bool = True) -> np.ndarray:
    """Validate ``X`` as ``(n, 2)`` rows of ``(beta, m1)`` or ``(n, 3)`` mass triples.

    Returns a float array of shape ``(n, 2)``.
    """
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] == 3:
        X = masses_to_beta_m1(X)
    elif X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (beta, m1) or 3 (masses), got {X.shape[1]}")
    if require_omega:
        bad = ~omega_membership(X[:, 0], X[:, 1])
        # masses_to_beta_m1 can land on the boundary of Omega up to rounding
        bad &= ~np.isclose(4 * X[:, 0], 1 + 2 * X[:, 1] - 3 * X[:, 1] ** 2, rtol=0, atol=1e-14)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise ValueError(f"row {i} = {X[i].tolist()} lies outside the mass space")
    return X


def check_n_features(estimator, X) -> None:
    n = getattr(estimator, "n_features_in_", None)
    if n is not None and X.shape[1] != n:
        raise ValueError(f"X has {X.shape[1]} features, but {type(estimator).__name__} was fitted with {n}")
