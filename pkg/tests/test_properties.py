import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from lagrange_stability.birkhoff import birkhoff_normal_form, closed_form_omegas
from lagrange_stability.classify import (ConvexityClass, bordered_matrix, convexity_class, convexity_data,
                                         diophantine_scan, omega_ps_membership, region_arrays,
                                         resonances_up_to, steepness_radius)
from lagrange_stability.dynamics import reduced_system
from lagrange_stability.hamiltonian import (band_m1, frequencies_from_beta, mass_parameters_from_beta_m1,
                                            masses_from_beta_m1)
from lagrange_stability.nbody import force_function, force_gradient, perp

betas = st.floats(2e-3, 1 / 27 - 1e-4)
bands = st.floats(0.02, 1.0)
configs = st.lists(st.floats(-2, 2), min_size=6, max_size=6).map(np.array)
masses3 = st.lists(st.floats(0.05, 1.0), min_size=3, max_size=3).map(lambda m: np.array(m) / sum(m))


def _ps_point(b, s):
    mp = mass_parameters_from_beta_m1(b, band_m1(b, s))
    assume(bool(omega_ps_membership(mp.beta, mp.m1)))
    assume(min(abs(b - x) for x in (1 / 75, 32 / 2187, 16 / 675, 1 / 36, 64 / 1875)) > 1e-5)
    return mp


def _separated(r):
    p = r.reshape(3, 2)
    return min(np.linalg.norm(p[i] - p[j]) for i in range(3) for j in range(i + 1, 3)) > 0.1


@given(configs, masses3, st.floats(0.2, 5))
def test_force_homogeneity(r, m, s):
    assume(_separated(r))
    assert force_function(s * r, m) * s == pytest.approx(force_function(r, m), rel=1e-12)


@given(configs, masses3, st.floats(0, 2 * np.pi))
def test_force_rotation_and_translation_invariance(r, m, t):
    assume(_separated(r))
    rot = (np.cos(t) * r.reshape(3, 2) + np.sin(t) * perp(r).reshape(3, 2)).ravel()
    assert force_function(rot, m) == pytest.approx(force_function(r, m), rel=1e-12)
    g = force_gradient(r, m).reshape(3, 2)
    np.testing.assert_allclose(g.sum(axis=0), 0, atol=1e-9 * np.abs(g).max())


@given(betas, bands)
def test_beta_m1_roundtrip(b, s):
    m = masses_from_beta_m1(b, band_m1(b, s))
    assert m.sum() == pytest.approx(1.0, abs=1e-14)
    assert m[0] * m[1] + m[1] * m[2] + m[2] * m[0] == pytest.approx(b, rel=1e-10)


@given(st.floats(1e-4, 0.7), st.floats(0.0, 1.0))
def test_region_nesting(mu, y):
    r = region_arrays(np.array([y * mu]), np.array([1 - mu]))
    o, ss, ps, qc, dqc = (bool(r[k][0]) for k in
                          ("in_Omega", "in_Omega_ss", "in_Omega_ps", "in_Omega_qc", "in_Omega_dqc"))
    assert (not ss or o) and (not ps or ss) and (not dqc or ps) and (not qc or dqc)


@given(betas, bands)
def test_normal_form_invariants(b, s):
    mp = _ps_point(b, s)
    res = birkhoff_normal_form(mp)
    W = res.normal_form.omega
    assert W[0, 0] == pytest.approx(-3.0, abs=1e-9)
    assert res.normal_form.imag_residual <= 1e-9
    np.testing.assert_allclose(W, W.T, atol=0)
    assert res.residual3 <= 1e-11 and res.residual4 <= 1e-11
    np.testing.assert_allclose(W, closed_form_omegas(mp).omega, rtol=1e-8)


@given(betas, bands)
def test_bordered_identity_and_never_convex(b, s):
    mp = _ps_point(b, s)
    nf = closed_form_omegas(mp)
    cd = convexity_data(nf)
    fs = nf.linear
    det4 = np.linalg.det(bordered_matrix(nf.omega, [1.0, -fs.mu1, fs.mu2]))
    q = cd.a0 * cd.a2 - cd.a1 ** 2
    assert q == pytest.approx(-det4, rel=1e-8, abs=1e-10 * (cd.a0 ** 2 + cd.a1 ** 2 + cd.a2 ** 2))
    assert convexity_class(nf) is not ConvexityClass.CONVEX
    assert steepness_radius(mp) > 0


@given(betas, st.integers(1, 8))
def test_resonance_hits_well_formed(b, order):
    for h in resonances_up_to(frequencies_from_beta(b), order, tol=1e-3):
        assert 1 <= h.order <= order and h.residual >= 0
        assert h.order == sum(abs(k) for k in h.k)


@given(betas)
def test_tiny_constant_diophantine(b):
    fs = frequencies_from_beta(b)
    assume(not resonances_up_to(fs, 12, tol=1e-12))
    assert diophantine_scan(fs, 1e-40, 7.0, 12).holds


@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), st.floats(-0.01, 0.01), st.floats(-0.01, 0.01),
       st.floats(-0.05, 0.05), st.floats(-0.01, 0.01))
def test_energy_is_a_first_integral(z5, z6, Z5, Z6, r, U):
    sys_ = reduced_system(mass_parameters_from_beta_m1(0.0197, 0.98))
    y = np.array([z5, z6, Z5, Z6, r, U, 0.0])
    f = np.asarray(sys_.rhs(0.0, y))
    h = 1e-6
    dE = (sys_.energy(y + h * f) - sys_.energy(y - h * f)) / (2 * h)
    assert abs(dE) <= 1e-9 * (1 + np.linalg.norm(f))
