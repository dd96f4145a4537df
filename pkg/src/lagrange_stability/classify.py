"""Decision procedures over the mass space ``(beta, m1)``.

Region membership, resonance enumeration and resonant-beta search,
(iso)degeneracy of the normal form by two independent routes, the convexity
lemma, the steepness radius and finite-order Diophantine scans. Scalar
entry points take :class:`MassParameters`/:class:`NormalFormQuadratic`;
the ``*_arrays`` helpers evaluate the closed forms on whole grids.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .birkhoff import (NormalFormQuadratic, closed_form_omega_arrays, closed_form_omegas,
                       omega_matrix_from_arrays, primitive_relation)
from .hamiltonian import (ROUTH_BETA, FrequencySet, MassParameters, frequencies_from_beta,
                          mu_values, omega_membership, omega_ss_membership)

RESONANT_BETAS = {
    (1, -2, 0): 1 / 36,
    (0, 2, -1): 16 / 675,
    (1, -3, 0): 32 / 2187,
    (1, 1, -2): 64 / 1875,
    (0, 3, -1): 1 / 75,
}
EXCLUDED_BETAS = np.array(sorted(RESONANT_BETAS.values()))
BETA_EXCLUSION_TOL = 1e-12
BETA_WINDOW = (1e-8, ROUTH_BETA - 1e-8)


class ConvexityClass(str, enum.Enum):
    CONVEX = "convex"
    QUASI_CONVEX = "quasi_convex"
    DIRECTIONALLY_QUASI_CONVEX = "directionally_quasi_convex"
    NONE = "none"
    LEMMA_INAPPLICABLE = "lemma_inapplicable"


CLASS_CODES = {c: i for i, c in enumerate(ConvexityClass)}


class TranscriptionAlarm(ArithmeticError):
    """Determinant route and explicit polynomial route disagree."""


class OutOfRegionError(ValueError):
    """Input outside the region where an operation is defined."""


class NoResonanceFoundError(ValueError):
    """No resonant beta in the search window for the requested order cap."""


# regions ---------------------------------------------------------------------

@dataclass(frozen=True)
class RegionMembership:
    in_Omega: bool
    in_Omega_ss: bool
    in_Omega_ps: bool
    in_Omega_qc: bool
    in_Omega_dqc: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def omega_ps_membership(beta, m1):
    beta = np.asarray(beta, dtype=float)
    near = np.any(np.abs(beta[..., None] - EXCLUDED_BETAS) <= BETA_EXCLUSION_TOL, axis=-1)
    return omega_ss_membership(beta, m1) & (beta < ROUTH_BETA) & ~near


def region_membership(mp_: MassParameters) -> RegionMembership:
    r = region_arrays(np.array([mp_.beta]), np.array([mp_.m1]))
    return RegionMembership(*(bool(r[k][0]) for k in
                              ("in_Omega", "in_Omega_ss", "in_Omega_ps", "in_Omega_qc", "in_Omega_dqc")))


def region_arrays(beta, m1) -> dict:
    """All five region flags on arrays (closed-form normal form)."""
    beta = np.asarray(beta, dtype=float)
    m1 = np.asarray(m1, dtype=float)
    in_o = omega_membership(beta, m1)
    in_ss = omega_ss_membership(beta, m1)
    in_ps = omega_ps_membership(beta, m1)
    cls = np.full(beta.shape, CLASS_CODES[ConvexityClass.NONE])
    if np.any(in_ps):
        cls[in_ps] = convexity_arrays(beta[in_ps], m1[in_ps])["class_code"]
    qc = in_ps & ((cls == CLASS_CODES[ConvexityClass.QUASI_CONVEX]) | (cls == CLASS_CODES[ConvexityClass.CONVEX]))
    dqc = in_ps & (qc | (cls == CLASS_CODES[ConvexityClass.DIRECTIONALLY_QUASI_CONVEX]))
    return {"in_Omega": in_o, "in_Omega_ss": in_ss, "in_Omega_ps": in_ps,
            "in_Omega_qc": qc, "in_Omega_dqc": dqc, "class_code": cls}


# resonances -----------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceHit:
    """Relation ``k0 omega0 + k1 omega1 + k2 omega2 = 0`` between unsigned frequencies."""

    k: tuple
    order: int
    residual: float

    def as_dict(self) -> dict:
        return {"k": list(self.k), "order": self.order, "residual": self.residual}


@lru_cache(maxsize=64)
def relation_vectors(max_order: int) -> np.ndarray:
    """Primitive integer 3-vectors with ``1 <= |k|_1 <= max_order`` and first nonzero entry positive."""
    r = np.arange(-max_order, max_order + 1)
    K = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    l1 = np.abs(K).sum(axis=1)
    K = K[(l1 >= 1) & (l1 <= max_order)]
    g = np.gcd.reduce(np.abs(K), axis=1)
    K = K[g == 1]
    first = np.where(K[:, 0] != 0, K[:, 0], np.where(K[:, 1] != 0, K[:, 1], K[:, 2]))
    K = K[first > 0]
    order = np.abs(K).sum(axis=1)
    idx = np.lexsort((K[:, 2], K[:, 1], K[:, 0], order))
    K = K[idx]
    K.setflags(write=False)
    return K


def resonances_up_to(fs: FrequencySet, max_order: int, tol: float = 1e-9) -> list:
    """All primitive relations with ``|k| <= max_order`` and residual ``<= tol * omega0``."""
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    K = relation_vectors(int(max_order))
    res = np.abs(K @ fs.unsigned)
    hits = np.nonzero(res <= tol * fs.omega0)[0]
    return [ResonanceHit(tuple(int(v) for v in K[i]), int(np.abs(K[i]).sum()), float(res[i])) for i in hits]


def resonant_betas_for(k) -> list:
    """All ``beta`` in the search window solving ``k0 + k1 mu1 + k2 mu2 = 0``.

    With ``mu1 = cos t`` and ``mu2 = sin t`` (``t`` in ``(pi/4, pi/2)``) the
    relation is ``R sin(t + phi) = -k0``, solved in closed form; then
    ``beta = sin(2t)^2 / 27``.
    """
    k0, k1, k2 = (float(v) for v in k)
    R = np.hypot(k1, k2)
    if R == 0 or abs(k0) > R:
        return []
    phi = np.arctan2(k1, k2)
    base = np.arcsin(np.clip(-k0 / R, -1.0, 1.0))
    out = []
    for t0 in (base - phi, np.pi - base - phi):
        for n in (-2, -1, 0, 1, 2):
            t = t0 + 2 * np.pi * n
            if np.pi / 4 < t < np.pi / 2:
                b = np.sin(2 * t) ** 2 / 27.0
                if BETA_WINDOW[0] < b < BETA_WINDOW[1]:
                    out.append(_polish_beta(k, b))
    return sorted(set(out))


def _relation_value(k, beta) -> float:
    mu1, mu2 = mu_values(beta)
    return float(k[0] + k[1] * mu1 + k[2] * mu2)


def _polish_beta(k, b) -> float:
    """One secant refinement in beta; keeps the closed-form root if it is already exact."""
    f0 = _relation_value(k, b)
    if f0 == 0.0:
        return float(b)
    h = max(abs(b) * 1e-7, 1e-14)
    lo, hi = max(b - h, BETA_WINDOW[0]), min(b + h, BETA_WINDOW[1])
    fl, fh = _relation_value(k, lo), _relation_value(k, hi)
    if fh == fl:
        return float(b)
    nb = b - f0 * (hi - lo) / (fh - fl)
    return float(nb) if abs(_relation_value(k, nb)) < abs(f0) else float(b)


def resonant_beta_table(max_order: int):
    """Arrays ``(beta, k)`` of every resonant beta of order ``<= max_order`` in the window (vectorized)."""
    K = relation_vectors(int(max_order)).astype(float)
    R = np.hypot(K[:, 1], K[:, 2])
    ok = (R > 0) & (np.abs(K[:, 0]) <= R)
    K, R = K[ok], R[ok]
    phi = np.arctan2(K[:, 1], K[:, 2])
    base = np.arcsin(np.clip(-K[:, 0] / R, -1, 1))
    betas, rows = [], []
    for t0 in (base - phi, np.pi - base - phi):
        for n in (-2, -1, 0, 1, 2):
            t = t0 + 2 * np.pi * n
            sel = (t > np.pi / 4) & (t < np.pi / 2)
            b = np.sin(2 * t[sel]) ** 2 / 27.0
            inw = (b > BETA_WINDOW[0]) & (b < BETA_WINDOW[1])
            betas.append(b[inw])
            rows.append(np.nonzero(sel)[0][inw])
    betas = np.concatenate(betas)
    rows = np.concatenate(rows)
    return betas, K[rows].astype(int)


def nearest_resonant_beta(beta: float, max_order: int):
    """Closest resonant ``beta*`` among relations of order ``<= max_order``.

    Ties in distance go to the lower order. Returns ``(beta*, ResonanceHit)``
    where the hit is evaluated at ``beta*``.
    """
    if not (0 < beta < ROUTH_BETA):
        raise OutOfRegionError(f"beta must lie in (0, 1/27), got {beta!r}")
    betas, K = resonant_beta_table(max_order)
    if betas.size == 0:
        raise NoResonanceFoundError(f"no resonant beta of order <= {max_order}")
    dist = np.abs(betas - beta)
    order = np.abs(K).sum(axis=1)
    i = int(np.lexsort((order, dist))[0])
    k = tuple(int(v) for v in K[i])
    b = _polish_beta(k, betas[i])
    fs = frequencies_from_beta(b)
    hit = ResonanceHit(k, int(order[i]), float(abs(np.dot(k, fs.unsigned))))
    return b, hit


# finite-order Diophantine scan ----------------------------------------------

@dataclass(frozen=True)
class DiophantineVerdict:
    worst: ResonanceHit
    worst_product: float
    c: float
    upsilon: float
    max_order: int
    holds: bool
    label: str = "finite-order"


def diophantine_scan(fs: FrequencySet, c: float, upsilon: float, max_order: int) -> DiophantineVerdict:
    """Minimize ``|<k, w>| |k|^upsilon`` over ``1 <= |k| <= max_order``."""
    if c <= 0 or upsilon <= 0:
        raise ValueError("c and upsilon must be positive")
    K = relation_vectors(int(max_order))
    order = np.abs(K).sum(axis=1)
    res = np.abs(K @ fs.unsigned)
    prod = res * order.astype(float) ** upsilon
    i = int(np.argmin(prod))
    hit = ResonanceHit(tuple(int(v) for v in K[i]), int(order[i]), float(res[i]))
    return DiophantineVerdict(hit, float(prod[i]), c, upsilon, int(max_order), bool(prod[i] >= c))


# degeneracy -----------------------------------------------------------------

def _poly(b, coeffs):
    """``sum coeffs[i] * b**i`` and the matching sum of absolute terms."""
    val = np.zeros_like(b)
    mag = np.zeros_like(b)
    for i, c in enumerate(coeffs):
        t = c * b ** i
        val = val + t
        mag = mag + np.abs(t)
    return val, mag


def _terms_sum(terms):
    val = sum(t[0] for t in terms)
    mag = sum(t[1] for t in terms)
    return val, mag


def f_deg_arrays(beta, m1, with_scale=False):
    """Explicit degeneracy polynomial in ``(beta, m1)``."""
    b = np.asarray(beta, dtype=np.longdouble)
    m = np.asarray(m1, dtype=np.longdouble)
    tail = 2 * b + m ** 2 - 2 * m + 1
    p0, s0 = _poly(b, [-47632, -9896841, 178185258, 52542675])
    p1, s1 = _poly(b, [-59392, 6417616, -243771759, 4055047758, -40790893923, 397050199920])
    p2, s2 = _poly(b, [-1857536, 250520816, -13039336341, 327340481715, -3995019640449,
                       19309935720393, 5465578392450])
    p3, s3 = _poly(b, [2408448, -359200768, 20645100208, -562788423405, 7048034089254,
                       -29436067209393, -15298708984020])
    p4, s4 = _poly(b, [-401408, 59975680, -3452615664, 94244985459, -1182106602432,
                       4980794507091, 1821859464150])
    c0 = 2 * (1 - 36 * b) ** 2 / 3 * b ** 4
    c1 = -11 * b ** 3 * m
    c2 = b ** 2 * m ** 2
    c3 = b * m ** 3
    c4 = 3 * m ** 4 * tail
    val, mag = _terms_sum([(c0 * p0, np.abs(c0) * s0), (c1 * p1, np.abs(c1) * s1), (c2 * p2, np.abs(c2) * s2),
                           (c3 * p3, np.abs(c3) * s3), (c4 * p4, np.abs(c4) * s4)])
    return (val, mag) if with_scale else val


def f_isodeg_arrays(beta, m1, with_scale=False):
    """Explicit isoenergetic-degeneracy polynomial in ``(beta, m1)``."""
    b = np.asarray(beta, dtype=np.longdouble)
    m = np.asarray(m1, dtype=np.longdouble)
    tail = 2 * b + m ** 2 - 2 * m + 1
    p0, s0 = _poly(b, [-47632, -9896841, 178185258, 52542675])
    p1, s1 = _poly(b, [-163328, 17908688, -701681085, 12399204438, -129174146793, 1114633724580])
    p2, s2 = _poly(b, [-928768, 125103520, -6502400730, 162904807989, -1979796586608,
                       9467506918989, 2856548519100])
    p3, s3 = _poly(b, [-150528, 22280704, -1270282468, 34351179507, -427262272146,
                       1777266330759, 992795560920])
    p4, s4 = _poly(b, [-200704, 29762048, -1699679520, 46035466371, -573816097674,
                       2412746489943, 952182839700])
    c0 = (1 - 36 * b) ** 2 * b ** 4
    c1 = -6 * b ** 3 * m
    c2 = 3 * b ** 2 * m ** 2
    c3 = -24 * b * m ** 3
    c4 = 9 * m ** 4 * tail
    val, mag = _terms_sum([(c0 * p0, np.abs(c0) * s0), (c1 * p1, np.abs(c1) * s1), (c2 * p2, np.abs(c2) * s2),
                           (c3 * p3, np.abs(c3) * s3), (c4 * p4, np.abs(c4) * s4)])
    return (val, mag) if with_scale else val


def f_dqc_arrays(beta, m1):
    """Explicit directional quasi-convexity polynomial."""
    b = np.asarray(beta, dtype=np.longdouble)
    m = np.asarray(m1, dtype=np.longdouble)
    P = m * (b - m * (1 - m))
    g = np.sqrt(1 - 27 * b)
    first = ((236 - 62 * g ** 4 - 479 * g ** 3 + 1299 * g ** 2 - 994 * g) * (g + 1) ** 2 / P
             + 729 * (76 - 401 * g ** 3 + 81 * g ** 2 - 18 * g))
    second = (3 * b * (16 - 469476 * b ** 3 + 71469 * b ** 2 - 2199 * b) / P
              + (1509030 * b ** 3 + 2316519 * b ** 2 - 133983 * b + 1936))
    return first * second


def deg_prefactor(beta, m1):
    b = np.asarray(beta, dtype=np.longdouble)
    m = np.asarray(m1, dtype=np.longdouble)
    P = m * (b - m * (1 - m))
    g2 = 1 - 27 * b
    return -27 * b / (128 * (16 - 675 * b) ** 2 * (1 - 36 * b) ** 2 * g2 ** 2 * P ** 2)


# The bordered determinant with border (1, -mu1, mu2) equals this prefactor
# times f_isodeg; the commonly quoted constant 27/64 is nine times too large.
ISODEG_PRINTED_SCALE = 9
CANCELLATION_FLOOR = 1e-8


def isodeg_prefactor(beta, m1, printed=False):
    b = np.asarray(beta, dtype=np.longdouble)
    m = np.asarray(m1, dtype=np.longdouble)
    P = m * (b - m * (1 - m))
    pref = -27 * b / (64 * (16 - 675 * b) ** 2 * (1 - 36 * b) ** 2 * (1 - 27 * b) ** 2 * P ** 2)
    return pref if printed else pref / ISODEG_PRINTED_SCALE


def bordered_matrix(W, signed) -> np.ndarray:
    """4x4 frequency-bordered Hessian, bordered by ``(1, -mu1, mu2)``."""
    B = np.zeros((4, 4))
    B[:3, :3] = W
    B[:3, 3] = B[3, :3] = signed
    return B


@dataclass(frozen=True)
class DegeneracyResult:
    det3: float
    det4: float
    f_deg: float
    f_isodeg: float
    f_deg_from_det: float
    f_isodeg_from_det: float
    f_deg_sign: int
    f_isodeg_sign: int
    agree: bool
    rel_dev_deg: float
    rel_dev_isodeg: float


def _signed_mu(fs: FrequencySet) -> np.ndarray:
    return np.array([1.0, -fs.mu1, fs.mu2])


def degeneracy_tests(nf: NormalFormQuadratic, mp_: MassParameters, rtol: float = 1e-6,
                     raise_on_mismatch: bool = True) -> DegeneracyResult:
    """Both routes: determinants of the normal form and the explicit polynomials.

    The bordered determinant uses the normalized border ``(1, -mu1, mu2)``
    (equivalently the frequency border divided by ``omega0``).
    """
    W = np.asarray(nf.omega, dtype=float)
    d3 = float(np.linalg.det(W))
    d4 = float(np.linalg.det(bordered_matrix(W, _signed_mu(nf.linear))))
    fd, sd = f_deg_arrays(mp_.beta, mp_.m1, with_scale=True)
    fi, si = f_isodeg_arrays(mp_.beta, mp_.m1, with_scale=True)
    fd_det = d3 / float(deg_prefactor(mp_.beta, mp_.m1))
    fi_det = d4 / float(isodeg_prefactor(mp_.beta, mp_.m1))
    # relative to the value itself, floored at the cancellation scale of the polynomial
    dev_d = abs(fd_det - float(fd)) / max(abs(float(fd)), CANCELLATION_FLOOR * float(sd))
    dev_i = abs(fi_det - float(fi)) / max(abs(float(fi)), CANCELLATION_FLOOR * float(si))
    agree = dev_d <= rtol and dev_i <= rtol
    if raise_on_mismatch and not agree:
        raise TranscriptionAlarm(f"determinant and polynomial routes disagree (deg {dev_d:.2e}, isodeg {dev_i:.2e})")
    return DegeneracyResult(d3, d4, float(fd), float(fi), fd_det, fi_det,
                            int(np.sign(fd)), int(np.sign(fi)), agree, dev_d, dev_i)


# convexity ------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexityData:
    a0: float
    a1: float
    a2: float
    endpoint: float

    def h(self, x):
        return self.a0 + 2 * self.a1 * np.asarray(x) + self.a2 * np.asarray(x) ** 2


def convexity_data(nf: NormalFormQuadratic, fs: FrequencySet | None = None) -> ConvexityData:
    fs = nf.linear if fs is None else fs
    W = nf.omega
    mu1, mu2 = fs.mu1, fs.mu2
    a0 = W[0, 0] * mu1 ** 2 + 2 * W[0, 1] * mu1 + W[1, 1]
    a1 = -W[0, 0] * mu1 * mu2 + W[0, 2] * mu1 - W[0, 1] * mu2 + W[1, 2]
    a2 = W[0, 0] * mu2 ** 2 - 2 * W[0, 2] * mu2 + W[2, 2]
    return ConvexityData(float(a0), float(a1), float(a2), float(mu1 / mu2))


def _dqc_branches(a0, a1, a2, x1):
    """The three branch systems of the convexity lemma (vectorized)."""
    a0 = np.asarray(a0, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    h_end = a0 + 2 * a1 * x1 + a2 * x1 ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        xv = np.where(a2 != 0, -a1 / np.where(a2 != 0, a2, 1.0), np.nan)
    h_v = a0 + 2 * a1 * xv + a2 * xv ** 2
    inside = (xv >= 0) & (xv <= x1)
    b1 = (a0 != 0) & (a2 == 0) & (a0 * (a0 + 2 * a1 * x1) > 0)
    b2 = (a0 != 0) & (a2 != 0) & (a0 * h_end > 0) & ~inside
    b3 = (a0 != 0) & (a2 != 0) & (a0 * h_end > 0) & (a0 * h_v > 0) & inside
    return b1 | b2 | b3


def convexity_class(nf: NormalFormQuadratic, fs: FrequencySet | None = None) -> ConvexityClass:
    """Strongest class that holds at ``rho = 0``."""
    fs = nf.linear if fs is None else fs
    W = np.asarray(nf.omega, dtype=float)
    det2 = W[0, 0] * W[1, 1] - W[0, 1] ** 2
    if det2 > 0 and np.linalg.det(W) < 0 and W[0, 0] < 0:
        return ConvexityClass.CONVEX
    cd = convexity_data(nf, fs)
    if cd.a0 * cd.a2 - cd.a1 ** 2 > 0:
        return ConvexityClass.QUASI_CONVEX
    if cd.a0 == 0:
        return ConvexityClass.LEMMA_INAPPLICABLE
    if bool(_dqc_branches(cd.a0, cd.a1, cd.a2, cd.endpoint)):
        return ConvexityClass.DIRECTIONALLY_QUASI_CONVEX
    return ConvexityClass.NONE


def convexity_arrays(beta, m1) -> dict:
    """Closed-form convexity data and class codes on arrays."""
    beta = np.asarray(beta, dtype=float)
    m1 = np.asarray(m1, dtype=float)
    d = closed_form_omega_arrays(beta, m1)
    w = {k: np.asarray(v, dtype=float) for k, v in d.items()}
    mu1, mu2 = mu_values(beta)
    a0 = w["00"] * mu1 ** 2 + 2 * w["01"] * mu1 + w["11"]
    a1 = -w["00"] * mu1 * mu2 + w["02"] * mu1 - w["01"] * mu2 + w["12"]
    a2 = w["00"] * mu2 ** 2 - 2 * w["02"] * mu2 + w["22"]
    det2 = w["00"] * w["11"] - w["01"] ** 2
    det3 = (w["00"] * (w["11"] * w["22"] - w["12"] ** 2) - w["01"] * (w["01"] * w["22"] - w["12"] * w["02"])
            + w["02"] * (w["01"] * w["12"] - w["11"] * w["02"]))
    x1 = mu1 / mu2
    convex = (det2 > 0) & (det3 < 0) & (w["00"] < 0)
    qc = a0 * a2 - a1 ** 2 > 0
    dqc = _dqc_branches(a0, a1, a2, x1)
    code = np.full(beta.shape, CLASS_CODES[ConvexityClass.NONE])
    code = np.where(dqc, CLASS_CODES[ConvexityClass.DIRECTIONALLY_QUASI_CONVEX], code)
    code = np.where((a0 == 0) & ~qc, CLASS_CODES[ConvexityClass.LEMMA_INAPPLICABLE], code)
    code = np.where(qc, CLASS_CODES[ConvexityClass.QUASI_CONVEX], code)
    code = np.where(convex, CLASS_CODES[ConvexityClass.CONVEX], code)
    return {"a0": a0, "a1": a1, "a2": a2, "det2": det2, "det3": det3, "endpoint": x1,
            "class_code": code, "omega": w}


def class_from_code(code: int) -> ConvexityClass:
    return list(ConvexityClass)[int(code)]


# steepness ------------------------------------------------------------------

def steepness_radius_value(beta, m1):
    """``r_beta`` on arrays (no region check)."""
    b = np.asarray(beta, dtype=float)
    m = np.asarray(m1, dtype=float)
    P = m * (b - m * (1 - m))
    den = (5 + 9 / ((1 - 36 * b) ** 2 * (1 - 27 * b))
           + 1e6 / ((27 * b - 1) ** 2 * (36 * b - 1) ** 2 * (675 * b - 16) ** 2 * P ** 2))
    return b ** 0.75 / np.sqrt(den)


def steepness_radius(mp_: MassParameters) -> float:
    if not bool(omega_ps_membership(mp_.beta, mp_.m1)):
        raise OutOfRegionError("steepness radius is defined on Omega_ps only")
    return float(steepness_radius_value(mp_.beta, mp_.m1))


@dataclass(frozen=True)
class SteepnessCheck:
    radius: float
    critical_point: np.ndarray | None
    critical_norm: float
    min_gradient_norm: float
    holds: bool


def steepness_check(mp_: MassParameters, nf: NormalFormQuadratic | None = None, n_samples: int = 200,
                    seed: int = 0) -> SteepnessCheck:
    """Confirm that the action gradient does not vanish in the ball of radius ``r_beta``."""
    r = steepness_radius(mp_)
    nf = closed_form_omegas(mp_) if nf is None else nf
    W = np.asarray(nf.omega, dtype=float)
    w = nf.linear.signed
    try:
        rho = np.linalg.solve(W, -w)
        crit = float(np.linalg.norm(rho))
    except np.linalg.LinAlgError:
        rho, crit = None, float("inf")
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n_samples, 3))
    pts *= (r * rng.uniform(0, 1, size=(n_samples, 1)) ** (1 / 3)) / np.linalg.norm(pts, axis=1, keepdims=True)
    grads = np.linalg.norm(w + pts @ W.T, axis=1)
    mg = float(grads.min())
    return SteepnessCheck(r, rho, crit, mg, bool(crit > r and mg > 0))


# aggregate report -----------------------------------------------------------

@dataclass
class StabilityReport:
    masses: list
    beta: float
    m1: float
    spectral: dict
    regions: dict
    resonances: list = field(default_factory=list)
    resonance_order: int = 4
    normal_form: dict | None = None
    degeneracy: dict | None = None
    convexity: str | None = None
    steepness_radius: float | None = None
    diophantine: dict | None = None
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


DIOPHANTINE_DEFAULTS = {"c": 1e-6, "upsilon": 7.0}


def spectral_summary(mp_: MassParameters) -> dict:
    """Verdict from the orbital variational matrix plus the Routh criterion.

    At ``27 beta = 1`` the shape block has a double imaginary pair with a
    Jordan block; this is reported as its own category instead of trusting
    the rounding-sensitive numerical spectrum.
    """
    from .hamiltonian import lagrange_analysis
    from .linear import build_variational, routh_criterion, spectral_verdict

    v = spectral_verdict(build_variational(lagrange_analysis(mp_), kind="orbital"))
    on_boundary = abs(27.0 * mp_.beta - 1.0) <= 1e-14
    spectral = True if on_boundary else v.spectrally_stable
    return {
        "spectrally_stable": bool(spectral),
        "linearly_stable": bool(v.linearly_stable and not on_boundary),
        "routh_criterion": routh_criterion(mp_.masses),
        "routh_boundary": bool(on_boundary),
        "max_real_part": v.max_real_part,
        "eigenvalues": [[float(e.real), float(e.imag)] for e in sorted(v.eigenvalues, key=lambda e: (e.imag, e.real))],
    }


def stability_report(mp_: MassParameters, max_order: int = 4, verify: bool = False,
                     dioph_c: float = DIOPHANTINE_DEFAULTS["c"],
                     dioph_upsilon: float = DIOPHANTINE_DEFAULTS["upsilon"]) -> StabilityReport:
    """Assemble every per-point verdict into one record."""
    from .birkhoff import ResonanceError, birkhoff_normal_form

    spec = spectral_summary(mp_)
    regions = region_membership(mp_)
    rep = StabilityReport(masses=[float(v) for v in mp_.masses], beta=float(mp_.beta), m1=float(mp_.m1),
                          spectral=spec, regions=regions.as_dict(), resonance_order=int(max_order))
    if not mp_.beta < ROUTH_BETA:
        rep.notes.append("beta >= 1/27: no elliptic frequencies, normal form not defined")
        return rep
    fs = frequencies_from_beta(mp_.beta)
    rep.resonances = [h.as_dict() for h in resonances_up_to(fs, max_order)]
    dv = diophantine_scan(fs, dioph_c, dioph_upsilon, max_order)
    rep.diophantine = {"label": dv.label, "holds": dv.holds, "c": dv.c, "upsilon": dv.upsilon,
                       "max_order": dv.max_order, "worst": dv.worst.as_dict(), "worst_product": dv.worst_product}
    if rep.resonances:
        rep.notes.append("resonant frequencies: excluded from Omega_ps")
    if not regions.in_Omega_ps:
        if not regions.in_Omega_ss:
            rep.notes.append("outside Omega_ss: normal-form classification not applicable")
        return rep
    try:
        nf = closed_form_omegas(mp_)
    except ResonanceError as exc:  # pragma: no cover - excluded betas are filtered above
        rep.notes.append(f"normal form refused: {exc}")
        return rep
    rep.normal_form = nf.to_dict()
    if verify:
        res = birkhoff_normal_form(mp_)
        dev = float(np.max(np.abs(res.normal_form.omega - nf.omega)) / np.max(np.abs(nf.omega)))
        rep.normal_form["verify_max_rel_dev"] = dev
    deg = degeneracy_tests(nf, mp_, raise_on_mismatch=False)
    rep.degeneracy = {"f_deg_sign": deg.f_deg_sign, "f_isodeg_sign": deg.f_isodeg_sign,
                      "det3": deg.det3, "det4": deg.det4, "routes_agree": deg.agree}
    rep.convexity = convexity_class(nf).value
    rep.steepness_radius = steepness_radius(mp_)
    return rep
