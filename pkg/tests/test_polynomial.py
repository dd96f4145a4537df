import numpy as np
import pytest

from lagrange_stability.polynomial import (ChartError, SparsePolynomial, binomial_series,
                                           geometric_series, monomial_count)


def _vars(n=2, cap=4, chart="pq"):
    return [SparsePolynomial.variable(i, n, cap, chart) for i in range(n)]


def test_product_truncates_at_cap():
    x, y = _vars()
    p = (x + y) ** 5
    assert p.degree() <= 4
    assert p.is_zero()


def test_binomial_expansion_coefficients():
    x, y = _vars()
    p = (x + y) ** 4
    assert p.coeff((2, 2)) == pytest.approx(6.0)
    assert p.coeff((3, 1)) == pytest.approx(4.0)


def test_inverse_series_times_base_is_one():
    x, y = _vars()
    eps = x + 0.5 * y
    one = SparsePolynomial.constant(1.0, 2, 4, "pq")
    r = binomial_series(eps, -1.0) * (one + eps)
    assert r.allclose(one)


def test_geometric_series():
    x, _ = _vars()
    one = SparsePolynomial.constant(1.0, 2, 4, "pq")
    g = geometric_series(x)
    assert (g * (one - x)).allclose(one)


def test_diff_and_evaluate():
    x, y = _vars()
    p = 3 * x * x * y + y ** 3
    assert p.diff(0)((1.0, 2.0)) == pytest.approx(12.0)
    assert p.diff(1)((1.0, 2.0)) == pytest.approx(15.0)


def test_linear_change_roundtrip():
    x, y = _vars()
    p = x ** 3 + 2 * x * y - y ** 2 + 0.25 * x * x * y * y
    M = np.array([[2.0, 1.0], [1.0, 1.0]])
    back = p.linear_change(M).linear_change(np.linalg.inv(M))
    assert back.allclose(p, atol=1e-12)


def test_chart_mismatch_raises():
    a = SparsePolynomial.variable(0, 2, 4, "pq")
    b = SparsePolynomial.variable(1, 2, 4, "xy")
    with pytest.raises(ChartError):
        a + b


def test_json_roundtrip():
    x, y = _vars()
    p = (1 + 2j) * x * y + y ** 4
    q = SparsePolynomial.from_json(p.to_json())
    assert q.allclose(p) and q.chart == p.chart


def test_monomial_count():
    assert monomial_count(6, 4) == 126
    assert monomial_count(6, 3) == 56


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        SparsePolynomial(2, {(-1, 0): 1.0})
