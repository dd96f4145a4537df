"""Grid sweeps over the mass space and their CSV/polyline outputs.

Three charts are supported:

``beta-m1``
    a rectangle in ``(beta, m1)``;
``mu-y``
    a rectangle in ``(mu, y)`` with ``beta = y mu`` and ``m1 = 1 - mu``;
``band``
    ``mu`` against the band fraction ``s = 4 m2 m3 / (m2 + m3)^2`` in
    ``(0, 1]``, i.e. ``y = 1 - mu + s mu / 4``. Every cell with
    ``mu < 1 - (sqrt(69) + 9) / 18`` and ``beta <= 1/27`` is in ``Omega_ss``,
    which makes this the chart of choice for the thin stability band.
"""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classify import (ConvexityClass, f_deg_arrays, f_isodeg_arrays, region_arrays)

WORKERS_ENV = "LAGRANGE_STABILITY_WORKERS"
CHARTS = ("beta-m1", "mu-y", "band")
COLUMNS = ("mu", "y", "beta", "m1", "in_Omega", "in_Omega_ss", "in_Omega_ps", "in_Omega_qc",
           "in_Omega_dqc", "f_deg_sign", "f_isodeg_sign", "convexity_class")
_CLASS_NAMES = [c.value for c in ConvexityClass]


@dataclass(frozen=True)
class SweepSpec:
    chart: str = "band"
    n1: int = 200
    n2: int = 200
    range1: tuple = (1e-4, 0.0385)
    range2: tuple = (0.005, 1.0)
    outputs: tuple = field(default=COLUMNS)

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}; choose one of {CHARTS}")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("grid resolution must be positive")
        for lo, hi in (self.range1, self.range2):
            if not lo <= hi:
                raise ValueError("grid ranges must satisfy lo <= hi")
        unknown = set(self.outputs) - set(COLUMNS)
        if unknown:
            raise ValueError(f"unknown output columns {sorted(unknown)}")


def chart_to_mass(chart: str, u, v):
    """Map chart coordinates to ``(mu, y, beta, m1)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if chart == "beta-m1":
        beta, m1 = u, v
        mu = 1.0 - m1
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(mu > 0, beta / np.where(mu > 0, mu, 1.0), np.nan)
    elif chart == "mu-y":
        mu, y = u, v
        beta, m1 = y * mu, 1.0 - mu
    elif chart == "band":
        mu = u
        y = 1.0 - mu + v * mu / 4.0
        beta, m1 = y * mu, 1.0 - mu
    else:
        raise ValueError(f"unknown chart {chart!r}")
    return mu, y, beta, m1


def grid(spec: SweepSpec):
    """Cell centres in row-major order: the first axis varies slowest."""
    a = np.linspace(*spec.range1, spec.n1)
    b = np.linspace(*spec.range2, spec.n2)
    U, V = np.meshgrid(a, b, indexing="ij")
    return a, b, chart_to_mass(spec.chart, U, V)


def evaluate_cells(beta, m1) -> dict:
    """Region flags, degeneracy signs and convexity class for arrays of points."""
    beta = np.asarray(beta, dtype=float)
    m1 = np.asarray(m1, dtype=float)
    reg = region_arrays(beta, m1)
    ps = reg["in_Omega_ps"]
    fd = np.zeros(beta.shape, dtype=int)
    fi = np.zeros(beta.shape, dtype=int)
    if np.any(ps):
        fd[ps] = np.sign(np.asarray(f_deg_arrays(beta[ps], m1[ps]), dtype=float)).astype(int)
        fi[ps] = np.sign(np.asarray(f_isodeg_arrays(beta[ps], m1[ps]), dtype=float)).astype(int)
    cls = np.where(ps, reg["class_code"], -1)
    out = {k: reg[k] for k in ("in_Omega", "in_Omega_ss", "in_Omega_ps", "in_Omega_qc", "in_Omega_dqc")}
    out.update(f_deg_sign=fd, f_isodeg_sign=fi, class_code=cls)
    return out


def _evaluate_block(args):
    beta, m1 = args
    return evaluate_cells(beta, m1)


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        n = int(raw) if raw else default
    except ValueError as exc:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, n)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> dict:
    """Evaluate every cell; rows are assembled in grid order regardless of scheduling."""
    a, b, (mu, y, beta, m1) = grid(spec)
    workers = worker_count() if workers is None else max(1, int(workers))
    if not np.any(np.nan_to_num(region_arrays(beta, m1)["in_Omega"], nan=0)):
        raise ValueError("sweep grid lies entirely outside Omega")
    blocks = [(beta[i], m1[i]) for i in range(beta.shape[0])]
    if workers == 1 or len(blocks) == 1:
        parts = [_evaluate_block(bl) for bl in blocks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_evaluate_block, blocks))
    cols = {k: np.stack([p[k] for p in parts]) for k in parts[0]}
    cols.update(mu=mu, y=y, beta=beta, m1=m1, axis1=a, axis2=b)
    return cols


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def sweep_csv(result: dict, columns=COLUMNS) -> str:
    """Serialize a sweep with a header row and 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    flat = {k: np.asarray(result[k if k != "convexity_class" else "class_code"]).ravel() for k in columns}
    n = flat[columns[0]].size
    for i in range(n):
        row = []
        for k in columns:
            v = flat[k][i]
            if k == "convexity_class":
                row.append(_CLASS_NAMES[int(v)] if v >= 0 else "")
            else:
                row.append(_fmt(v))
        w.writerow(row)
    return buf.getvalue()


def zero_locus_polylines(result: dict, field_name: str = "f_deg", mask_key: str = "in_Omega_ps") -> list:
    """Polylines (in chart coordinates) where the named polynomial vanishes inside the mask.

    The polynomial is re-evaluated on the grid; cells outside the mask are
    masked out so no contour crosses them.
    """
    import contourpy

    fn = {"f_deg": f_deg_arrays, "f_isodeg": f_isodeg_arrays}[field_name]
    beta, m1 = result["beta"], result["m1"]
    mask = np.asarray(result[mask_key], dtype=bool)
    z = np.zeros(beta.shape)
    if np.any(mask):
        val = np.asarray(fn(beta[mask], m1[mask]), dtype=float)
        z[mask] = np.sign(val) * np.log1p(np.abs(val))
    z = np.ma.array(z, mask=~mask)
    X, Y = np.meshgrid(result["axis1"], result["axis2"], indexing="ij")
    gen = contourpy.contour_generator(X, Y, z, line_type=contourpy.LineType.Separate)
    return [np.asarray(line) for line in gen.lines(0.0) if len(line) >= 2]


def region_counts(result: dict) -> dict:
    return {k: int(np.count_nonzero(result[k])) for k in
            ("in_Omega", "in_Omega_ss", "in_Omega_ps", "in_Omega_qc", "in_Omega_dqc")}
