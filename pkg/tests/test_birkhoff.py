import numpy as np
import pytest

from lagrange_stability.birkhoff import (NonRealNormalFormError, ResonanceError, action_angle_form,
                                         birkhoff_normal_form, closed_form_omegas, complexified_hamiltonian,
                                         generating_identity_residual, normalize, primitive_relation,
                                         solve_homological_3)
from lagrange_stability.classify import omega_ps_membership
from lagrange_stability.hamiltonian import (assemble_hamiltonian, band_m1, complexify, frequencies,
                                            mass_parameters, mass_parameters_from_beta_m1, to_diagonal_real)
from lagrange_stability.polynomial import SparsePolynomial


def _sample_points(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        b = rng.uniform(1e-3, 0.036)
        mp = mass_parameters_from_beta_m1(b, band_m1(b, rng.uniform(0.05, 1.0)))
        if omega_ps_membership(mp.beta, mp.m1):
            out.append(mp)
    return out


def test_closed_form_agreement(mp_sym):
    res = birkhoff_normal_form(mp_sym)
    cf = closed_form_omegas(mp_sym)
    np.testing.assert_allclose(res.normal_form.omega, cf.omega, rtol=1e-8)
    assert res.normal_form.omega[0, 0] == pytest.approx(-3.0, abs=1e-9)
    assert res.residual3 <= 1e-11 and res.residual4 <= 1e-11


def test_generating_function_has_no_resonant_terms(mp_asym):
    res = birkhoff_normal_form(mp_asym)
    for S, d in ((res.generating.S3, 3), (res.generating.S4, 4)):
        assert all(sum(e) == d for e, _ in S.items())
        assert all(e[:3] != e[3:] for e, _ in S.items())


def test_generating_identity(mp_asym):
    hz, fs = complexified_hamiltonian(mp_asym)
    res = normalize(hz, fs)
    assert generating_identity_residual(hz, res.normal_form, res.generating) <= 1e-10


def test_reality_at_many_points():
    for mp in _sample_points(50, seed=1):
        res = birkhoff_normal_form(mp)
        assert res.normal_form.imag_residual <= 1e-9
        assert res.normal_form.omega[0, 0] == pytest.approx(-3.0, abs=1e-9)


def test_chart_independence(mp_asym):
    fs = frequencies(mp_asym)
    h = to_diagonal_real(assemble_hamiltonian(mp_asym), fs, mp_asym)
    base = normalize(complexify(h), fs).normal_form.omega
    c, s = np.cos(0.7), np.sin(0.7)
    R = np.eye(6)
    R[0, 0] = R[3, 3] = c
    R[0, 3], R[3, 0] = -s, s
    rotated = normalize(complexify(h.linear_change(R, chart=h.chart)), fs).normal_form.omega
    np.testing.assert_allclose(rotated, base, rtol=1e-8, atol=1e-12)


def test_flipped_frequency_sign_is_detected(mp_sym):
    hz, fs = complexified_hamiltonian(mp_sym)
    right = normalize(hz, fs).normal_form.omega
    try:
        wrong = normalize(hz, fs, signed=fs.unsigned).normal_form.omega
    except NonRealNormalFormError:
        return
    assert np.max(np.abs(wrong - right)) > 1.0


def test_zero_cubic_gives_zero_generator(mp_sym):
    fs = frequencies(mp_sym)
    z = SparsePolynomial.zero(6, 4, "zeta_eta")
    assert solve_homological_3(z, fs).is_zero()


def test_resonance_error_at_one_36():
    mp = mass_parameters_from_beta_m1(1 / 36, band_m1(1 / 36))
    hz, fs = complexified_hamiltonian(mp)
    with pytest.raises(ResonanceError) as exc:
        normalize(hz, fs)
    assert exc.value.relation == (1, -2, 0)
    with pytest.raises(ResonanceError):
        closed_form_omegas(mp)


def test_gamma_denominator_vanishes_at_one_36():
    g = np.sqrt(1 - 27 / 36)
    assert 2 * g - 1 == pytest.approx(0.0, abs=1e-15)


def test_cross_terms_independent_of_mass_split():
    b = 0.02
    a = closed_form_omegas(mass_parameters_from_beta_m1(b, band_m1(b, 0.2))).omega
    c = closed_form_omegas(mass_parameters_from_beta_m1(b, band_m1(b, 0.9))).omega
    assert a[0, 1] == pytest.approx(c[0, 1], rel=1e-14)
    assert a[0, 2] == pytest.approx(c[0, 2], rel=1e-14)
    assert abs(a[1, 1] - c[1, 1]) > 1e-6


def test_action_angle_form(mp_sym):
    nf = closed_form_omegas(mp_sym)
    H = action_angle_form(nf)
    assert H(np.zeros(3)) == 0.0
    fs = nf.linear
    np.testing.assert_allclose(H.gradient(np.zeros(3)), [fs.omega0, -fs.omega1, fs.omega2])
    np.testing.assert_array_equal(H.hessian([1, 2, 3]), nf.omega)
    rho = H.critical_point()
    np.testing.assert_allclose(H.gradient(rho), 0, atol=1e-12)


def test_primitive_relation():
    assert primitive_relation((-2, 4, 0)) == (1, -2, 0)
    assert primitive_relation((0, 0, 0)) == (0, 0, 0)
