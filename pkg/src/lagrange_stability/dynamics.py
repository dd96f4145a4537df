"""Direct integration of the reduced three-body equations in the moving frame.

The state is ``(z5, z6, Z5, Z6, r, Upsilon, theta)`` with ``R = 1 + r`` the
scale, ``theta`` the phase relative to the uniform rotation and the angular
momentum fixed at ``J = omega``. ``Z`` enters the shape equation through the
kinetic metric and through the Coriolis coupling, so each evaluation solves

    (I + z z^T / z3^2 - a a^T) Zdot = g,    a = Q z.

The right-hand side is written with scalar ``math`` calls because it is
evaluated millions of times per long run.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.integrate import ode

from .hamiltonian import MassParameters, lagrange_analysis, mass_parameters
from .linear import VariationalKind, _assemble

CHART_MARGIN = 0.25
COLLAPSE_MARGIN = 0.5
STATE_DIM = 7


class ChartExitError(RuntimeError):
    """The shape coordinates left the disc ``z5^2 + z6^2 <= CHART_MARGIN``."""


class CollapseError(RuntimeError):
    """The scale ``R = 1 + r`` dropped below ``COLLAPSE_MARGIN``."""


class IntegrationError(RuntimeError):
    """The step-size controller failed (underflow or too many steps)."""


@dataclass
class ReducedState:
    z5: float = 0.0
    z6: float = 0.0
    Z5: float = 0.0
    Z6: float = 0.0
    r: float = 0.0
    Upsilon: float = 0.0
    theta: float = 0.0
    J: float | None = None

    def to_array(self) -> np.ndarray:
        return np.array([self.z5, self.z6, self.Z5, self.Z6, self.r, self.Upsilon, self.theta])

    @classmethod
    def from_array(cls, y, J=None) -> "ReducedState":
        y = np.asarray(y, dtype=float)
        return cls(*map(float, y[:STATE_DIM]), J=J)

    @property
    def z3(self) -> float:
        return math.sqrt(1.0 - self.z5 ** 2 - self.z6 ** 2)

    def displacement(self) -> float:
        """Distance from the relative equilibrium in the ``(z, Z, r, Upsilon)`` variables."""
        return float(np.linalg.norm(self.to_array()[:6]))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    energy: np.ndarray
    momentum: np.ndarray
    energy_drift: float
    momentum_drift: float
    omega: float
    nfev: int = 0
    status: str = "completed"

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> ReducedState:
        return ReducedState.from_array(self.states[i], J=self.omega)

    def displacement(self) -> np.ndarray:
        return np.linalg.norm(self.states[:, :6], axis=1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "z5", "z6", "Z5", "Z6", "r", "Upsilon", "energy", "momentum"])
            for t, y, e, j in zip(self.times, self.states, self.energy, self.momentum):
                w.writerow([repr(float(v)) for v in (t, *y[:6], e, j)])


@dataclass
class ReducedSystem:
    """Constants of the moving frame for one mass vector."""

    mp: MassParameters
    masses: tuple = field(init=False)
    E3: tuple = field(init=False)
    E5: tuple = field(init=False)
    E6: tuple = field(init=False)
    q: tuple = field(init=False)
    lam: float = field(init=False)
    omega: float = field(init=False)
    shape_eigenvalues: np.ndarray = field(init=False, repr=False)
    Q: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        an = lagrange_analysis(self.mp)
        B = an.basis
        self.masses = tuple(float(v) for v in an.masses)
        self.E3 = tuple(float(v) for v in B[:, 2])
        self.E5 = tuple(float(v) for v in B[:, 4])
        self.E6 = tuple(float(v) for v in B[:, 5])
        self.Q = np.array(an.Q, dtype=float)
        self.q = tuple(float(v) for v in self.Q.ravel())
        self.lam = float(an.lam)
        self.omega = math.sqrt(self.lam)
        self.shape_eigenvalues = np.array(an.shape_eigenvalues, dtype=float)

    # -- potential on the chart ------------------------------------------
    def _potential(self, z5, z6, with_grad):
        z3 = math.sqrt(1.0 - z5 * z5 - z6 * z6)
        E3, E5, E6 = self.E3, self.E5, self.E6
        X = [z3 * E3[i] + z5 * E5[i] + z6 * E6[i] for i in range(6)]
        m = self.masses
        U = 0.0
        g = [0.0] * 6
        for i, j in ((0, 1), (0, 2), (1, 2)):
            dx = X[2 * j] - X[2 * i]
            dy = X[2 * j + 1] - X[2 * i + 1]
            d2 = dx * dx + dy * dy
            d = math.sqrt(d2)
            mm = m[i] * m[j]
            U += mm / d
            if with_grad:
                f = mm / (d2 * d)
                g[2 * i] += f * dx
                g[2 * i + 1] += f * dy
                g[2 * j] -= f * dx
                g[2 * j + 1] -= f * dy
        if not with_grad:
            return U, 0.0, 0.0
        g3 = sum(g[i] * E3[i] for i in range(6))
        g5 = sum(g[i] * E5[i] for i in range(6))
        g6 = sum(g[i] * E6[i] for i in range(6))
        return U, g5 - z5 / z3 * g3, g6 - z6 / z3 * g3

    def potential(self, z5, z6) -> float:
        """``U(z) = U(z3 E3 + z5 E5 + z6 E6)`` at unit scale."""
        return self._potential(float(z5), float(z6), False)[0]

    # -- vector field ---------------------------------------------------------
    def rhs(self, t, y, out=None):
        z5, z6, Z5, Z6, r, Ups = y[0], y[1], y[2], y[3], y[4], y[5]
        rr = z5 * z5 + z6 * z6
        R = 1.0 + r
        if rr >= 1.0 or R <= 0.0:
            return [math.nan] * STATE_DIM
        c = 1.0 / (1.0 - rr)  # 1 / z3^2
        q00, q01, q10, q11 = self.q
        J = self.omega
        U, dU5, dU6 = self._potential(z5, z6, True)
        a5 = q00 * z5 + q01 * z6
        a6 = q10 * z5 + q11 * z6
        b5 = q00 * Z5 + q01 * Z6
        b6 = q10 * Z5 + q11 * Z6
        zZ = z5 * Z5 + z6 * Z6
        ZZ = Z5 * Z5 + Z6 * Z6
        s = Z5 * a5 + Z6 * a6
        R2 = R * R
        R3 = R2 * R
        Th = J / R2 - s
        k1 = ZZ * c + zZ * zZ * c * c
        k2 = 2.0 * J * Ups / R3
        k3 = 2.0 * Ups / R
        g5 = -(z5 * k1 - k2 * a5 + 2.0 * Th * b5) - k3 * (z5 * zZ * c + Z5 + Th * a5) + dU5 / R3
        g6 = -(z6 * k1 - k2 * a6 + 2.0 * Th * b6) - k3 * (z6 * zZ * c + Z6 + Th * a6) + dU6 / R3
        s00 = 1.0 + z5 * z5 * c - a5 * a5
        s01 = z5 * z6 * c - a5 * a6
        s11 = 1.0 + z6 * z6 * c - a6 * a6
        det = s00 * s11 - s01 * s01
        dZ5 = (s11 * g5 - s01 * g6) / det
        dZ6 = (s00 * g6 - s01 * g5) / det
        dUps = R * (zZ * zZ * c + ZZ + J * J / (R2 * R2) - s * s) - U / R2
        res = [Z5, Z6, dZ5, dZ6, Ups, dUps, Th - J]
        if out is not None:
            out[:] = res
            return out
        return res

    def energy(self, y) -> float:
        """Energy minus ``omega J``; ``-3 omega^2 / 2`` at the equilibrium."""
        z5, z6, Z5, Z6, r, Ups = (float(v) for v in y[:6])
        R = 1.0 + r
        rr = z5 * z5 + z6 * z6
        q00, q01, q10, q11 = self.q
        s = Z5 * (q00 * z5 + q01 * z6) + Z6 * (q10 * z5 + q11 * z6)
        zZ = z5 * Z5 + z6 * Z6
        J = self.omega
        kin = 0.5 * Ups ** 2 + 0.5 * R * R * (zZ * zZ / (1.0 - rr) + Z5 * Z5 + Z6 * Z6 - s * s) \
            + 0.5 * J * J / (R * R)
        return kin - self.potential(z5, z6) / R - self.omega * J

    def momentum(self, y) -> float:
        """Angular momentum rebuilt from the velocities: ``R^2 (thetadot + Z^T Q z)``."""
        z5, z6, Z5, Z6, r = (float(v) for v in y[:5])
        R = 1.0 + r
        q00, q01, q10, q11 = self.q
        s = Z5 * (q00 * z5 + q01 * z6) + Z6 * (q10 * z5 + q11 * z6)
        thetadot = self.rhs(0.0, y)[6] + self.omega
        return R * R * (thetadot + s)

    def jacobian_fd(self, y=None, h=1e-6) -> np.ndarray:
        """Central-difference Jacobian of the ``(z, Z, r, Upsilon)`` block."""
        y0 = np.zeros(STATE_DIM) if y is None else np.asarray(y, dtype=float)
        J = np.zeros((6, 6))
        for k in range(6):
            e = np.zeros(STATE_DIM)
            e[k] = h
            J[:, k] = (np.asarray(self.rhs(0, y0 + e))[:6] - np.asarray(self.rhs(0, y0 - e))[:6]) / (2 * h)
        return J

    def variational_matrix(self) -> np.ndarray:
        return _assemble(self.shape_eigenvalues, self.Q, self.omega, VariationalKind.ORBITAL).matrix

    def check_state(self, y) -> None:
        if y[0] ** 2 + y[1] ** 2 > CHART_MARGIN or not np.all(np.isfinite(y)):
            raise ChartExitError(f"shape coordinates left the chart: z = ({y[0]!r}, {y[1]!r})")
        if 1.0 + y[4] <= COLLAPSE_MARGIN:
            raise CollapseError(f"scale collapsed: R = {1.0 + y[4]!r}")


_SYSTEMS: dict = {}


def reduced_system(mp: MassParameters) -> ReducedSystem:
    key = tuple(np.round(mp.masses, 17))
    sys_ = _SYSTEMS.get(key)
    if sys_ is None:
        if len(_SYSTEMS) > 64:
            _SYSTEMS.clear()
        sys_ = _SYSTEMS[key] = ReducedSystem(mp)
    return sys_


def _coerce(mp) -> MassParameters:
    return mp if isinstance(mp, MassParameters) else mass_parameters(mp)


def reduced_rhs(s: ReducedState, mp) -> ReducedState:
    """Time derivative of ``s``; ``J`` is fixed at ``omega``."""
    sys_ = reduced_system(_coerce(mp))
    y = s.to_array()
    sys_.check_state(y)
    return ReducedState.from_array(sys_.rhs(0.0, y), J=sys_.omega)


def conserved_quantities(s: ReducedState, mp) -> tuple[float, float]:
    """``(energy, momentum)`` of the exact moving-frame Lagrangian."""
    sys_ = reduced_system(_coerce(mp))
    y = s.to_array()
    sys_.check_state(y)
    return sys_.energy(y), sys_.momentum(y)


def integrate(s0: ReducedState, mp, T: float, n_out: int = 1000, rtol: float = 1e-12,
              atol: float = 1e-14, max_steps: int = 10_000_000, t_eval=None,
              on_exit: str = "raise") -> Trajectory:
    """Integrate from ``s0`` over ``[0, T]`` (``T < 0`` integrates backwards).

    Uses the embedded 8(5,3) Dormand-Prince pair with adaptive steps. The
    state is checked for chart exit and collapse at every output time; with
    ``on_exit="stop"`` the trajectory is truncated there and ``status`` names
    the reason instead of raising.
    """
    if on_exit not in ("raise", "stop"):
        raise ValueError("on_exit must be 'raise' or 'stop'")
    mp = _coerce(mp)
    sys_ = reduced_system(mp)
    y0 = s0.to_array()
    sys_.check_state(y0)
    if t_eval is None:
        t_eval = np.linspace(0.0, T, int(n_out) + 1)
    t_eval = np.asarray(t_eval, dtype=float)
    nfev = [0]

    def f(t, y):
        nfev[0] += 1
        return sys_.rhs(t, y)

    solver = ode(f).set_integrator("dop853", rtol=rtol, atol=atol, nsteps=max_steps)
    solver.set_initial_value(y0, t_eval[0])
    states = np.empty((t_eval.size, STATE_DIM))
    states[0] = y0
    status = "completed"
    n = t_eval.size
    for i, t in enumerate(t_eval[1:], start=1):
        y = solver.integrate(t)
        try:
            if not solver.successful():
                sys_.check_state(solver.y)
                raise IntegrationError(f"integrator stopped at t = {solver.t!r} "
                                       f"(code {solver.get_return_code()})")
            sys_.check_state(y)
        except (ChartExitError, CollapseError) as exc:
            if on_exit == "raise":
                raise
            status = "chart_exit" if isinstance(exc, ChartExitError) else "collapse"
            n = i
            break
        states[i] = y
    t_eval, states = t_eval[:n], states[:n]
    energy = np.array([sys_.energy(y) for y in states])
    momentum = np.array([sys_.momentum(y) for y in states])
    e0 = energy[0]
    drift = float(np.max(np.abs(energy - e0)) / max(abs(e0), 1e-300))
    mdrift = float(np.max(np.abs(momentum - sys_.omega)))
    return Trajectory(t_eval, states, energy, momentum, drift, mdrift, sys_.omega, nfev[0], status)


def perturbed_state(eps: float, component: str = "z5") -> ReducedState:
    names = [f.name for f in fields(ReducedState)]
    if component not in names[:STATE_DIM]:
        raise ValueError(f"unknown state component {component!r}")
    return ReducedState(**{component: float(eps)})


def growth_rate(traj: Trajectory, lo: float = 1e-5, hi: float = 1e-3) -> float:
    """Exponential rate fitted to ``log |displacement|`` between two thresholds.

    The envelope is taken as the running maximum so oscillations inside the
    linear regime do not bias the fit.
    """
    d = np.maximum.accumulate(traj.displacement())
    mask = (d >= lo) & (d <= hi)
    if mask.sum() < 3:
        raise ValueError("too few samples inside the fitting window")
    return float(np.polyfit(traj.times[mask], np.log(d[mask]), 1)[0])
