import json
import subprocess
import sys

import numpy as np
import pytest

from lagrange_stability.cli import main
from lagrange_stability.hamiltonian import band_m1


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_stable(capsys):
    code, out, _ = run(capsys, "classify", "--masses", "0.98", "0.01", "0.01")
    assert code == 0
    rep = json.loads(out)
    assert rep["spectral"]["spectrally_stable"] and rep["resonances"] == []
    assert rep["regions"]["in_Omega_ps"] and rep["steepness_check"]["holds"]


def test_classify_unstable(capsys):
    code, out, _ = run(capsys, "classify", "--masses", "1", "1", "1")
    assert code == 2
    assert not json.loads(out)["spectral"]["spectrally_stable"]


@pytest.mark.parametrize("argv", [
    ("classify", "--masses", "-1", "1", "1"),
    ("classify", "--beta", "0.3", "--m1", "0.99"),
    ("classify", "--beta", "0.02"),
    ("classify", "--masses", "1", "x", "1"),
    ("nonsense",),
])
def test_malformed_input_exits_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1


def test_classify_at_resonance(capsys):
    b = 1 / 36
    code, out, _ = run(capsys, "classify", "--beta", repr(b), "--m1", repr(band_m1(b)))
    rep = json.loads(out)
    assert code == 0
    assert any(h["order"] == 3 and h["k"] == [1, -2, 0] for h in rep["resonances"])
    assert not rep["regions"]["in_Omega_ps"]


def test_normalform_refuses_resonance(capsys):
    b = 16 / 675
    code, _, err = run(capsys, "normalform", "--beta", repr(b), "--m1", repr(band_m1(b)))
    assert code == 1
    diag = json.loads(err)
    assert [0, 2, -1] in [h["k"] for h in diag["resonances"]]


def test_normalform_verify(capsys):
    code, out, _ = run(capsys, "normalform", "--masses", "0.98", "0.01", "0.01", "--verify")
    assert code == 0
    d = json.loads(out)
    assert d["closed_form"]["omega00"] == -3
    assert d["max_rel_dev"] <= 1e-8


def test_resonances_command(capsys):
    code, out, _ = run(capsys, "resonances", "--beta", repr(1 / 36), "--order", "4", "--nearest")
    assert code == 0
    d = json.loads(out)
    assert d["relation"]["order"] == 3 and abs(d["nearest_beta"] - 1 / 36) < 1e-15


def test_report_systems(capsys):
    code, out, _ = run(capsys, "report-systems")
    d = json.loads(out)
    assert d["sun_jupiter"]["resonance"]["order"] == 48
    assert d["earth_moon"]["resonance"]["order"] == 21
    assert not d["earth_moon"]["directionally_quasi_convex"]
    assert d["earth_moon"]["label"] == "limit estimate"


def test_byte_identical_output(capsys):
    argv = ("classify", "--beta", "0.02", "--m1", repr(band_m1(0.02, 0.3)))
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_sweep_csv_and_contours(tmp_path, capsys):
    out = tmp_path / "s.csv"
    cont = tmp_path / "c.json"
    code, _, _ = run(capsys, "sweep", "--n1", "30", "--n2", "20", "--out", str(out), "--contours", str(cont))
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 601
    assert set(json.loads(cont.read_text())) == {"f_deg", "f_isodeg", "chart"}


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"order": 3}))
    _, out, _ = run(capsys, "--config", str(cfg), "classify", "--masses", "0.98", "0.01", "0.01")
    assert json.loads(out)["resonance_order"] == 3
    _, out, _ = run(capsys, "--config", str(cfg), "classify", "--masses", "0.98", "0.01", "0.01", "--order", "5")
    assert json.loads(out)["resonance_order"] == 5


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    code, _, _ = run(capsys, "--config", str(cfg), "classify", "--masses", "0.98", "0.01", "0.01")
    assert code == 1


def test_integrate_csv(tmp_path, capsys):
    path = tmp_path / "t.csv"
    code, out, _ = run(capsys, "integrate", "--masses", "0.98", "0.01", "0.01", "--perturb", "z5", "1e-4",
                       "--periods", "5", "--n-out", "20", "--csv", str(path))
    assert code == 0
    d = json.loads(out)
    assert d["status"] == "completed" and d["energy_drift"] < 1e-10
    assert len(path.read_text().splitlines()) == 22


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "lagrange_stability.cli", "classify", "--masses", "1", "1", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 2
