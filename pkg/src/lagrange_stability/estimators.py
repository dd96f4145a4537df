"""scikit-learn compatible wrappers around the per-point decision procedures.

The estimators carry no learned parameters: ``fit`` validates the input and
records ``n_features_in_`` / ``classes_`` so they compose with pipelines,
grid searches and ``cross_val_score``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_mass_points, check_n_features
from .birkhoff import birkhoff_normal_form, closed_form_omega_arrays
from .classify import ConvexityClass, class_from_code, region_arrays
from .hamiltonian import ROUTH_BETA, mass_parameters_from_beta_m1, mu_values
from .sweep import evaluate_cells

OMEGA_KEYS = ("00", "01", "02", "11", "12", "22")
TARGETS = ("convexity", "spectral", "region")
REGION_LABELS = ("outside", "Omega", "Omega_ss", "Omega_ps", "Omega_dqc", "Omega_qc")


class StabilityClassifier(ClassifierMixin, BaseEstimator):
    """Label mass points ``(beta, m1)`` by a stability verdict.

    Parameters
    ----------
    target : {"convexity", "spectral", "region"}
        ``convexity`` gives the convexity class on Omega_ps (``"undefined"``
        elsewhere); ``spectral`` gives ``"stable"``/``"unstable"`` by the
        Routh criterion; ``region`` gives the innermost region containing the
        point.
    """

    def __init__(self, target: str = "convexity"):
        self.target = target

    def _labels(self):
        if self.target == "convexity":
            return np.array([c.value for c in ConvexityClass] + ["undefined"])
        if self.target == "spectral":
            return np.array(["stable", "unstable"])
        return np.array(REGION_LABELS)

    def fit(self, X, y=None):
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}, got {self.target!r}")
        X = check_mass_points(X, require_omega=False)
        self.n_features_in_ = X.shape[1]
        self.classes_ = self._labels()
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = check_mass_points(X, require_omega=False)
        check_n_features(self, X)
        beta, m1 = X[:, 0], X[:, 1]
        if self.target == "spectral":
            return np.where(beta <= ROUTH_BETA, "stable", "unstable").astype(object)
        reg = region_arrays(beta, m1)
        if self.target == "convexity":
            out = np.full(beta.shape, "undefined", dtype=object)
            ps = reg["in_Omega_ps"]
            out[ps] = [class_from_code(c).value for c in reg["class_code"][ps]]
            return out
        level = (reg["in_Omega"].astype(int) + reg["in_Omega_ss"] + reg["in_Omega_ps"]
                 + reg["in_Omega_dqc"] + reg["in_Omega_qc"])
        return np.array(REGION_LABELS, dtype=object)[level]


class NormalFormTransformer(TransformerMixin, BaseEstimator):
    """Map ``(beta, m1)`` to the six coefficients ``omega_jk`` (``j <= k``).

    Parameters
    ----------
    method : {"closed_form", "homological"}
        Closed forms (vectorized) or the full normalization pipeline per row.
    with_frequencies : bool
        Append ``mu1, mu2`` (frequencies relative to ``omega0``).
    """

    def __init__(self, method: str = "closed_form", with_frequencies: bool = False):
        self.method = method
        self.with_frequencies = with_frequencies

    def fit(self, X, y=None):
        if self.method not in ("closed_form", "homological"):
            raise ValueError(f"unknown method {self.method!r}")
        X = check_mass_points(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_mass_points(X)
        check_n_features(self, X)
        beta, m1 = X[:, 0], X[:, 1]
        if np.any(beta >= ROUTH_BETA):
            raise ValueError("the normal form needs beta < 1/27")
        if self.method == "closed_form":
            d = closed_form_omega_arrays(beta, m1)
            W = np.column_stack([np.asarray(d[k], dtype=float) for k in OMEGA_KEYS])
        else:
            rows = []
            for b, m in X:
                om = birkhoff_normal_form(mass_parameters_from_beta_m1(b, m)).normal_form.omega
                rows.append([om[int(k[0]), int(k[1])] for k in OMEGA_KEYS])
            W = np.array(rows)
        if self.with_frequencies:
            mu1, mu2 = mu_values(beta)
            W = np.column_stack([W, mu1, mu2])
        return W

    def get_feature_names_out(self, input_features=None):
        names = [f"omega{k}" for k in OMEGA_KEYS]
        if self.with_frequencies:
            names += ["mu1", "mu2"]
        return np.array(names, dtype=object)


class RegionFeatures(TransformerMixin, BaseEstimator):
    """Region flags and the signs of the degeneracy polynomials as a numeric matrix."""

    columns = ("in_Omega", "in_Omega_ss", "in_Omega_ps", "in_Omega_qc", "in_Omega_dqc",
               "f_deg_sign", "f_isodeg_sign")

    def fit(self, X, y=None):
        X = check_mass_points(X, require_omega=False)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_mass_points(X, require_omega=False)
        check_n_features(self, X)
        cells = evaluate_cells(X[:, 0], X[:, 1])
        return np.column_stack([np.asarray(cells[c], dtype=float) for c in self.columns])

    def get_feature_names_out(self, input_features=None):
        return np.array(self.columns, dtype=object)
