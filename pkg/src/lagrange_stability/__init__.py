"""Stability toolkit for the Lagrange equilibrium of the planar three-body problem."""
from .birkhoff import (NormalFormQuadratic, ResonanceError, birkhoff_normal_form,
                       closed_form_omegas)
from .classify import (ConvexityClass, StabilityReport, convexity_class, degeneracy_tests,
                       diophantine_scan, nearest_resonant_beta, region_membership,
                       resonances_up_to, stability_report, steepness_radius)
from .estimators import NormalFormTransformer, RegionFeatures, StabilityClassifier
from .dynamics import ReducedState, Trajectory, conserved_quantities, integrate, reduced_rhs
from .hamiltonian import (MassParameters, assemble_hamiltonian, cubic_quartic_coeffs, frequencies,
                          mass_parameters, mass_parameters_from_beta_m1)
from .linear import build_variational, routh_criterion, spectral_verdict
from .nbody import analyze_central_config, equilateral_configuration, euler_configuration
from .polynomial import SparsePolynomial

__version__ = "0.1.0"

__all__ = [
    "ConvexityClass", "MassParameters", "NormalFormQuadratic", "NormalFormTransformer", "ReducedState",
    "RegionFeatures", "ResonanceError", "SparsePolynomial", "StabilityClassifier", "StabilityReport", "Trajectory", "analyze_central_config",
    "assemble_hamiltonian", "birkhoff_normal_form", "build_variational", "closed_form_omegas",
    "conserved_quantities", "convexity_class", "cubic_quartic_coeffs", "degeneracy_tests",
    "diophantine_scan", "equilateral_configuration", "euler_configuration", "frequencies",
    "integrate", "mass_parameters", "mass_parameters_from_beta_m1", "nearest_resonant_beta",
    "reduced_rhs", "region_membership", "resonances_up_to", "routh_criterion", "spectral_verdict",
    "stability_report", "steepness_radius",
]
