import numpy as np
import pytest

from lagrange_stability.dynamics import (ChartExitError, CollapseError, ReducedState, Trajectory,
                                         conserved_quantities, integrate, perturbed_state, reduced_rhs,
                                         reduced_system)
from lagrange_stability.hamiltonian import mass_parameters


@pytest.fixture(scope="module")
def sys_(mp_module):
    return reduced_system(mp_module)


@pytest.fixture(scope="module")
def mp_module():
    return mass_parameters(np.array([0.98, 0.01, 0.01]))


def test_equilibrium_is_fixed(sys_, mp_module):
    assert np.max(np.abs(sys_.rhs(0.0, np.zeros(7)))) <= 1e-13
    d = reduced_rhs(ReducedState(), mp_module)
    assert np.max(np.abs(d.to_array())) <= 1e-13


def test_jacobian_matches_variational_matrix(sys_):
    J = sys_.jacobian_fd()[:6, :6]
    assert np.max(np.abs(J - sys_.variational_matrix())) <= 1e-6


def test_two_body_reduction(sys_):
    lam, w = sys_.lam, sys_.omega
    for r, U in ((0.1, 0.0), (-0.05, 0.02)):
        d = sys_.rhs(0.0, np.array([0, 0, 0, 0, r, U, 0.0]))
        assert d[4] == pytest.approx(U, abs=1e-15)
        assert d[5] == pytest.approx(w ** 2 / (1 + r) ** 3 - lam / (1 + r) ** 2, rel=1e-12)
        np.testing.assert_allclose(d[:4], 0, atol=1e-15)


def test_equilibrium_conserved_quantities(mp_module):
    E, J = conserved_quantities(ReducedState(), mp_module)
    w = mp_module.beta ** 0.75
    assert E == pytest.approx(-1.5 * w ** 2, rel=1e-13)
    assert J == pytest.approx(w, rel=1e-15)


def test_equilibrium_stays_put(mp_module):
    w = mp_module.beta ** 0.75
    tr = integrate(ReducedState(), mp_module, 10 * 2 * np.pi / w, n_out=50)
    assert tr.displacement().max() <= 1e-12
    assert tr.energy_drift <= 1e-12


def test_short_run_conserves_energy(mp_module):
    w = mp_module.beta ** 0.75
    tr = integrate(perturbed_state(1e-3, "z5"), mp_module, 100 * 2 * np.pi / w, n_out=400)
    assert tr.status == "completed"
    assert tr.energy_drift <= 1e-8
    assert tr.momentum_drift <= 1e-14
    assert np.all(np.diff(tr.times) > 0)


def test_time_reversal(mp_module):
    w = mp_module.beta ** 0.75
    s0 = perturbed_state(1e-3, "z6")
    T = 20 * 2 * np.pi / w
    fwd = integrate(s0, mp_module, T, n_out=10)
    back = integrate(fwd.state(-1), mp_module, -T, n_out=10)
    assert np.max(np.abs(back.states[-1] - s0.to_array())) <= 1e-6


def test_chart_exit_and_collapse(mp_module):
    with pytest.raises(ChartExitError):
        integrate(ReducedState(z5=0.6), mp_module, 1.0)
    with pytest.raises(CollapseError):
        integrate(ReducedState(r=-0.6), mp_module, 1.0)


def test_csv_export(tmp_path, mp_module):
    tr = integrate(perturbed_state(1e-4), mp_module, 10.0, n_out=5)
    assert isinstance(tr, Trajectory)
    path = tmp_path / "traj.csv"
    tr.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,z5,z6,Z5,Z6,r,Upsilon,energy,momentum"
    assert len(lines) == 7


def test_unknown_component():
    with pytest.raises(ValueError):
        perturbed_state(1e-3, "q")
