"""Sparse multivariate polynomials with complex coefficients and a degree cap.

Terms are stored as ``{exponent tuple: coefficient}``. Every arithmetic
operation truncates above ``degree_cap`` so that products of truncated
series stay truncated series. Each polynomial carries a chart label; mixing
charts raises :class:`ChartError`. Coefficients are Python complex numbers,
or ``mpmath.mpc`` when extended precision is requested via :meth:`to_mp`.
"""
from __future__ import annotations

import json
from math import comb
from typing import Iterable, Mapping, Sequence

import mpmath
import numpy as np

PRUNE_TOL = 1e-15


class ChartError(ValueError):
    """Raised when polynomials written in different coordinate charts are combined."""


def _coef(c):
    """Coefficient as ``complex``; mpmath numbers keep their precision."""
    if isinstance(c, mpmath.mpc):
        return c
    if isinstance(c, mpmath.mpf):
        return mpmath.mpc(c)
    return complex(c)


def _grlex_key(exponent):
    return (sum(exponent), tuple(-e for e in exponent))


class SparsePolynomial:
    """Truncated polynomial in ``nvars`` variables.

    Parameters
    ----------
    nvars : int
        Number of variables.
    terms : mapping, optional
        ``{exponent tuple: coefficient}``.
    degree_cap : int
        Terms of total degree above the cap are discarded.
    chart : str, optional
        Label of the coordinate chart, e.g. ``"pq"`` or ``"zeta_eta"``.
    """

    __slots__ = ("nvars", "degree_cap", "chart", "_terms")

    def __init__(self, nvars: int, terms: Mapping | None = None, degree_cap: int = 4,
                 chart: str | None = None):
        self.nvars = int(nvars)
        self.degree_cap = int(degree_cap)
        self.chart = chart
        clean = {}
        if terms:
            for exp, c in terms.items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != self.nvars:
                    raise ValueError(f"exponent {exp} does not have {self.nvars} entries")
                if any(e < 0 for e in exp):
                    raise ValueError(f"negative exponent {exp}")
                if sum(exp) > self.degree_cap:
                    continue
                c = _coef(c)
                if abs(c) > PRUNE_TOL:
                    clean[exp] = clean.get(exp, 0) + c
        self._terms = clean

    # construction helpers
    @classmethod
    def zero(cls, nvars, degree_cap=4, chart=None):
        return cls(nvars, {}, degree_cap, chart)

    @classmethod
    def constant(cls, value, nvars, degree_cap=4, chart=None):
        return cls(nvars, {(0,) * nvars: value}, degree_cap, chart)

    @classmethod
    def variable(cls, index, nvars, degree_cap=4, chart=None):
        exp = [0] * nvars
        exp[index] = 1
        return cls(nvars, {tuple(exp): 1.0}, degree_cap, chart)

    @classmethod
    def linear(cls, coeffs: Sequence, constant=0.0, degree_cap=4, chart=None):
        """Affine form ``constant + sum_i coeffs[i] * x_i``."""
        n = len(coeffs)
        terms = {(0,) * n: constant}
        for i, c in enumerate(coeffs):
            exp = [0] * n
            exp[i] = 1
            terms[tuple(exp)] = c
        return cls(n, terms, degree_cap, chart)

    def _like(self, terms, chart=None):
        out = SparsePolynomial.__new__(SparsePolynomial)
        out.nvars = self.nvars
        out.degree_cap = self.degree_cap
        out.chart = self.chart if chart is None else chart
        out._terms = {k: v for k, v in terms.items() if abs(v) > PRUNE_TOL}
        return out

    # basic protocol
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        """Terms in graded lexicographic order."""
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]))

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(k for k, _ in self.items())

    def __getitem__(self, exponent):
        return self._terms.get(tuple(exponent), 0j)

    def coeff(self, exponent) -> complex:
        return self[exponent]

    def __repr__(self):
        body = " + ".join(f"({c:.6g})*{e}" for e, c in self.items()[:8])
        more = "" if len(self) <= 8 else f" + ... ({len(self)} terms)"
        return f"SparsePolynomial[{self.chart}]({body or '0'}{more})"

    def copy(self):
        return self._like(self._terms)

    def with_chart(self, chart):
        return self._like(self._terms, chart=chart)

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def homogeneous(self, d: int) -> "SparsePolynomial":
        return self._like({e: c for e, c in self._terms.items() if sum(e) == d})

    def truncate(self, cap: int) -> "SparsePolynomial":
        return self._like({e: c for e, c in self._terms.items() if sum(e) <= cap})

    def max_abs(self) -> float:
        return float(max((abs(c) for c in self._terms.values()), default=0.0))

    def is_zero(self, tol=0.0) -> bool:
        return self.max_abs() <= tol

    def conj(self):
        return self._like({e: c.conjugate() for e, c in self._terms.items()})

    def real_part(self):
        return self._like({e: _coef(c.real) for e, c in self._terms.items()})

    def to_mp(self):
        """Copy with ``mpmath.mpc`` coefficients (exact conversion at the current precision)."""
        return self._like({e: mpmath.mpc(c) for e, c in self._terms.items()})

    def to_complex(self):
        """Copy with coefficients rounded to ``complex``."""
        return self._like({e: complex(c) for e, c in self._terms.items()})

    def map_coefficients(self, fn):
        return self._like({e: fn(e, c) for e, c in self._terms.items()})

    # arithmetic
    def _check(self, other):
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
        if self.chart is not None and other.chart is not None and self.chart != other.chart:
            raise ChartError(f"cannot combine chart {self.chart!r} with {other.chart!r}")

    def _coerce(self, other):
        if isinstance(other, SparsePolynomial):
            self._check(other)
            return other
        return SparsePolynomial.constant(other, self.nvars, self.degree_cap, self.chart)

    def _merged_chart(self, other):
        return self.chart if self.chart is not None else other.chart

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        res = self._like(out, chart=self._merged_chart(other))
        res.degree_cap = min(self.degree_cap, other.degree_cap)
        return res.truncate(res.degree_cap)

    __radd__ = __add__

    def __neg__(self):
        return self._like({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, SparsePolynomial):
            other = _coef(other)
            return self._like({e: c * other for e, c in self._terms.items()})
        self._check(other)
        cap = min(self.degree_cap, other.degree_cap)
        out: dict = {}
        right = [(e, sum(e), c) for e, c in other._terms.items()]
        for e1, c1 in self._terms.items():
            d1 = sum(e1)
            for e2, d2, c2 in right:
                if d1 + d2 > cap:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        res = self._like(out, chart=self._merged_chart(other))
        res.degree_cap = cap
        return res

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, scalar):
        return self * (1 / _coef(scalar))

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = SparsePolynomial.constant(1.0, self.nvars, self.degree_cap, self.chart)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # calculus and substitution
    def diff(self, index: int) -> "SparsePolynomial":
        out = {}
        for e, c in self._terms.items():
            k = e[index]
            if k:
                ee = list(e)
                ee[index] = k - 1
                out[tuple(ee)] = c * k
        return self._like(out)

    def substitute(self, index: int, replacement: "SparsePolynomial") -> "SparsePolynomial":
        """Replace variable ``index`` by ``replacement`` (same variable set)."""
        replacement = self._coerce(replacement)
        powers = [SparsePolynomial.constant(1.0, self.nvars, self.degree_cap, replacement.chart)]
        out = SparsePolynomial.zero(self.nvars, self.degree_cap, self._merged_chart(replacement))
        for e, c in self._terms.items():
            k = e[index]
            while len(powers) <= k:
                powers.append(powers[-1] * replacement)
            ee = list(e)
            ee[index] = 0
            mono = SparsePolynomial(self.nvars, {tuple(ee): c}, self.degree_cap, out.chart)
            out = out + mono * powers[k]
        return out

    def compose(self, replacements: Sequence["SparsePolynomial"], chart=None) -> "SparsePolynomial":
        """Substitute every variable simultaneously: ``x_i -> replacements[i]``.

        The replacements may live in a different variable set and chart.
        """
        if len(replacements) != self.nvars:
            raise ValueError("need one replacement per variable")
        target = replacements[0]
        nv, cap = target.nvars, min(self.degree_cap, target.degree_cap)
        chart = chart if chart is not None else target.chart
        reps = [r.with_chart(chart) for r in replacements]
        cache = [[SparsePolynomial.constant(1.0, nv, cap, chart)] for _ in reps]
        acc: dict = {}
        for e, c in self._terms.items():
            prod = None
            for i, k in enumerate(e):
                if not k:
                    continue
                while len(cache[i]) <= k:
                    cache[i].append(cache[i][-1] * reps[i])
                prod = cache[i][k] if prod is None else prod * cache[i][k]
            if prod is None:
                prod = cache[0][0]
            for ee, cc in prod._terms.items():
                acc[ee] = acc.get(ee, 0) + c * cc
        return SparsePolynomial(nv, acc, cap, chart)

    def linear_change(self, matrix, chart=None) -> "SparsePolynomial":
        """Compose with the linear map ``old = matrix @ new``."""
        matrix = np.asarray(matrix)
        if matrix.shape[0] != self.nvars:
            raise ValueError("matrix row count must equal the number of variables")
        reps = [SparsePolynomial.linear(list(matrix[i]), 0.0, self.degree_cap, chart)
                for i in range(matrix.shape[0])]
        return self.compose(reps, chart=chart)

    def __call__(self, point) -> complex:
        point = np.asarray(point, dtype=complex)
        total = 0j
        for e, c in self._terms.items():
            total += c * np.prod(point ** np.asarray(e))
        return total

    # comparison and serialization
    def allclose(self, other, atol=1e-12) -> bool:
        return (self - other).max_abs() <= atol

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        return {
            "nvars": self.nvars,
            "degree_cap": self.degree_cap,
            "chart": self.chart,
            "terms": [[list(e), [float(c.real), float(c.imag)]] for e, c in self.items()],
        }

    @classmethod
    def from_dict(cls, data) -> "SparsePolynomial":
        terms = {tuple(e): complex(re, im) for e, (re, im) in data["terms"]}
        return cls(data["nvars"], terms, data["degree_cap"], data.get("chart"))

    @classmethod
    def from_json(cls, text: str) -> "SparsePolynomial":
        return cls.from_dict(json.loads(text))


def power_series(eps: SparsePolynomial, coefficients: Iterable[complex]) -> SparsePolynomial:
    """Evaluate ``sum_n c_n * eps**n`` for ``eps`` without constant term."""
    if abs(eps[(0,) * eps.nvars]) > 0:
        raise ValueError("power_series needs eps(0) == 0")
    out = SparsePolynomial.zero(eps.nvars, eps.degree_cap, eps.chart)
    term = SparsePolynomial.constant(1.0, eps.nvars, eps.degree_cap, eps.chart)
    for n, c in enumerate(coefficients):
        if n > eps.degree_cap:
            break
        if n:
            term = term * eps
            if term.is_zero():
                break
        out = out + term * c
    return out


def binomial_series(eps: SparsePolynomial, a: float) -> SparsePolynomial:
    """Truncated expansion of ``(1 + eps)**a``."""
    coeffs = []
    c = 1.0
    for n in range(eps.degree_cap + 1):
        coeffs.append(c)
        c = c * (a - n) / (n + 1)
    return power_series(eps, coeffs)


def geometric_series(eps: SparsePolynomial) -> SparsePolynomial:
    """Truncated expansion of ``1 / (1 - eps)``."""
    return power_series(eps, [1.0] * (eps.degree_cap + 1))


def monomial_count(nvars: int, degree: int) -> int:
    """Number of monomials of exact total ``degree`` in ``nvars`` variables."""
    return comb(degree + nvars - 1, nvars - 1)
