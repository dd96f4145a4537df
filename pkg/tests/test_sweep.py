import numpy as np
import pytest

from lagrange_stability.sweep import (SweepSpec, region_counts, run_sweep, sweep_csv, worker_count,
                                      zero_locus_polylines)


@pytest.fixture(scope="module")
def band():
    return run_sweep(SweepSpec("band", 200, 200))


def test_stability_band_is_thin():
    res = run_sweep(SweepSpec("mu-y", 200, 200, (1e-3, 2 / 3), (0.3, 1.0)))
    c = region_counts(res)
    assert c["in_Omega"] > 0
    assert c["in_Omega_ss"] / c["in_Omega"] < 0.2


def test_zero_locus_nonempty(band):
    for name in ("f_deg", "f_isodeg"):
        lines = zero_locus_polylines(band, name)
        assert lines and all(line.shape[1] == 2 for line in lines)


def test_no_quasi_convexity_between_1_75_and_1_36(band):
    b = band["beta"]
    sel = (b > 1 / 75) & (b < 1 / 36)
    assert np.any(sel & band["in_Omega_ps"])
    assert not np.any(band["in_Omega_qc"][sel])


def test_two_resolutions_agree():
    lo = run_sweep(SweepSpec("band", 21, 11))
    hi = run_sweep(SweepSpec("band", 41, 21))
    for k in ("in_Omega_ps", "in_Omega_qc", "in_Omega_dqc", "f_deg_sign", "f_isodeg_sign", "class_code"):
        np.testing.assert_array_equal(hi[k][::2, ::2], lo[k])
    np.testing.assert_array_equal(hi["beta"][::2, ::2], lo["beta"])


def test_deterministic_and_parallel_invariant():
    spec = SweepSpec("beta-m1", 12, 9, (1e-3, 0.036), (0.96, 0.999))
    a = sweep_csv(run_sweep(spec, workers=1))
    b = sweep_csv(run_sweep(spec, workers=3))
    assert a == b
    assert a.splitlines()[0].startswith("mu,y,beta,m1,in_Omega")
    assert len(a.splitlines()) == 1 + 12 * 9


def test_grid_outside_omega_rejected():
    with pytest.raises(ValueError):
        run_sweep(SweepSpec("beta-m1", 3, 3, (0.3, 0.32), (0.1, 0.2)))


def test_bad_spec():
    with pytest.raises(ValueError):
        SweepSpec("polar")
    with pytest.raises(ValueError):
        SweepSpec(outputs=("mu", "nope"))


def test_worker_env(monkeypatch):
    monkeypatch.setenv("LAGRANGE_STABILITY_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("LAGRANGE_STABILITY_WORKERS", "x")
    with pytest.raises(ValueError):
        worker_count()
