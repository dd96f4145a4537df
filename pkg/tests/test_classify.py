import numpy as np
import pytest

from lagrange_stability.birkhoff import closed_form_omegas, primitive_relation
from lagrange_stability.classify import (RESONANT_BETAS, ConvexityClass, OutOfRegionError, TranscriptionAlarm,
                                         convexity_arrays, convexity_class, convexity_data, degeneracy_tests,
                                         diophantine_scan, f_deg_arrays, f_dqc_arrays, f_isodeg_arrays,
                                         nearest_resonant_beta, omega_ps_membership, region_arrays, region_membership,
                                         resonances_up_to, stability_report, steepness_check, steepness_radius,
                                         steepness_radius_value)
from lagrange_stability.hamiltonian import (band_m1, frequencies_from_beta, mass_parameters,
                                            mass_parameters_from_beta_m1)


def test_region_examples(mp_sym):
    r = region_membership(mp_sym)
    assert r.in_Omega and r.in_Omega_ss and r.in_Omega_ps
    eq = region_membership(mass_parameters(np.full(3, 1 / 3)))
    assert eq.in_Omega and not eq.in_Omega_ss and not eq.in_Omega_ps
    edge = region_membership(mass_parameters_from_beta_m1(1 / 36, band_m1(1 / 36)))
    assert edge.in_Omega_ss and not edge.in_Omega_ps


def test_region_nesting_on_grid():
    mu, y = np.meshgrid(np.linspace(1e-4, 0.2, 200), np.linspace(0.3, 1.0, 200), indexing="ij")
    r = region_arrays(y * mu, 1 - mu)
    o, ss, ps, qc, dqc = (np.asarray(r[k], bool) for k in
                          ("in_Omega", "in_Omega_ss", "in_Omega_ps", "in_Omega_qc", "in_Omega_dqc"))
    assert not np.any(ss & ~o) and not np.any(ps & ~ss)
    assert not np.any(dqc & ~ps) and not np.any(qc & ~dqc)


def test_generic_point_has_no_low_order_resonance():
    assert resonances_up_to(frequencies_from_beta(0.0197), 10, tol=1e-9) == []


@pytest.mark.parametrize("k,beta", sorted(RESONANT_BETAS.items()))
def test_printed_resonances_recovered(k, beta):
    hits = resonances_up_to(frequencies_from_beta(beta), 4, tol=1e-9)
    match = [h for h in hits if h.k == k]
    assert match and match[0].residual <= 1e-12
    assert match[0].order == sum(abs(v) for v in k)


def test_nearest_resonance_at_one_36():
    b, hit = nearest_resonant_beta(1 / 36, 4)
    assert b == pytest.approx(1 / 36, abs=1e-15)
    assert hit.order == 3 and hit.residual <= 1e-12


def test_nearest_rejects_out_of_window():
    with pytest.raises(OutOfRegionError):
        nearest_resonant_beta(0.05, 4)


def test_diophantine(oracles):
    ref = oracles["diophantine_0.0197_ups7_order30"]
    v = diophantine_scan(frequencies_from_beta(0.0197), 0.01, 7.0, 30)
    assert v.holds and v.label == "finite-order"
    assert v.worst_product == pytest.approx(ref["min_product"], rel=1e-9)
    assert v.worst.k == primitive_relation(ref["k"])
    assert not diophantine_scan(frequencies_from_beta(1 / 36), 1e-12, 7.0, 3).holds
    assert diophantine_scan(frequencies_from_beta(0.0197), 1e-30, 7.0, 30).holds


def test_dual_route_degeneracy():
    rng = np.random.default_rng(2)
    n = 0
    while n < 20:
        b = rng.uniform(1e-3, 0.036)
        mp = mass_parameters_from_beta_m1(b, band_m1(b, rng.uniform(0.05, 1)))
        if not omega_ps_membership(mp.beta, mp.m1):
            continue
        d = degeneracy_tests(closed_form_omegas(mp), mp)
        assert d.agree and d.rel_dev_deg <= 1e-6 and d.rel_dev_isodeg <= 1e-6
        cd = convexity_data(closed_form_omegas(mp))
        qf = cd.a0 * cd.a2 - cd.a1 ** 2
        assert qf == pytest.approx(-d.det4, rel=1e-8)
        assert (qf > 0) == (d.f_isodeg > 0)
        n += 1


def test_transcription_alarm_fires_on_tampered_matrix(mp_sym):
    nf = closed_form_omegas(mp_sym)
    W = nf.omega.copy()
    W[1, 1] *= 1.01
    tampered = type(nf)(W, nf.linear)
    with pytest.raises(TranscriptionAlarm):
        degeneracy_tests(tampered, mp_sym)


def test_f_deg_zero_locus_bracket():
    s = 0.5
    b = np.linspace(1e-3, 1 / 75 - 1e-4, 400)
    m1 = np.array([band_m1(x, s) for x in b])
    f = np.asarray(f_deg_arrays(b, m1), float)
    idx = np.nonzero(np.sign(f[:-1]) != np.sign(f[1:]))[0]
    assert idx.size > 0
    lo, hi = b[idx[0]], b[idx[0] + 1]
    flo = float(f_deg_arrays(lo, band_m1(lo, s)))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = float(f_deg_arrays(mid, band_m1(mid, s)))
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    assert hi - lo < 1e-12


def test_convexity_matches_f_dqc(mp_sym):
    cls = convexity_class(closed_form_omegas(mp_sym))
    dqc = cls in (ConvexityClass.DIRECTIONALLY_QUASI_CONVEX, ConvexityClass.QUASI_CONVEX)
    assert dqc == bool(f_dqc_arrays(0.0197, 0.98) > 0)


def test_quasi_convex_example():
    b = np.linspace(1 / 36 + 1e-5, 64 / 1875 - 1e-5, 60)
    s = np.linspace(0.02, 1, 60)
    B, S = np.meshgrid(b, s)
    M1 = np.vectorize(band_m1)(B, S)
    fi = np.asarray(f_isodeg_arrays(B, M1), float)
    ps = region_arrays(B, M1)["in_Omega_ps"]
    sel = np.argwhere((fi > 0) & ps)
    assert sel.size > 0
    i, j = sel[0]
    mp = mass_parameters_from_beta_m1(B[i, j], M1[i, j])
    assert convexity_class(closed_form_omegas(mp)) is ConvexityClass.QUASI_CONVEX


def test_never_convex_on_samples():
    mu, y = np.meshgrid(np.linspace(1e-4, 0.0385, 120), np.linspace(0.96, 1.0, 120), indexing="ij")
    r = region_arrays(y * mu, 1 - mu)
    codes = np.asarray(convexity_arrays((y * mu)[r["in_Omega_ps"]], (1 - mu)[r["in_Omega_ps"]])["class_code"])
    assert codes.size > 0
    assert not np.any(codes == list(ConvexityClass).index(ConvexityClass.CONVEX))


def test_steepness(mp_sym):
    r = steepness_radius(mp_sym)
    assert r > 0
    chk = steepness_check(mp_sym)
    assert chk.holds and chk.critical_norm > r
    assert float(steepness_radius_value(0.0197, 0.98)) == pytest.approx(r)
    # shrinking m3 at fixed beta drives the radius to zero
    radii = [float(steepness_radius_value(mp.beta, mp.m1)) for mp in
             (mass_parameters(np.array([0.98, 0.02 - e, e])) for e in (1e-2, 1e-4, 1e-6))]
    assert radii[0] > radii[1] > radii[2]


def test_steepness_outside_region():
    with pytest.raises(OutOfRegionError):
        steepness_radius(mass_parameters(np.full(3, 1 / 3)))


def test_report_is_consistent(mp_sym):
    rep = stability_report(mp_sym, verify=True)
    assert rep.spectral["spectrally_stable"] and rep.resonances == []
    assert rep.normal_form["omega00"] == pytest.approx(-3.0, abs=1e-12)
    assert rep.normal_form["verify_max_rel_dev"] <= 1e-8
    assert rep.convexity == convexity_class(closed_form_omegas(mp_sym)).value
    assert rep.diophantine["label"] == "finite-order"
