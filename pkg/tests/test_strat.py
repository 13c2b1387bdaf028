"""Divided-derivative computations: tame coefficients, Artin-Schreier series, irregularity."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mumford import strat
from mumford.strat import BiSeries, LaurentSeries


def _poly_mul(a, b, p):
    out = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = (out.get(i + j, 0) + x * y) % p
    return {k: v for k, v in out.items() if v}


_laurent = st.dictionaries(st.integers(-6, 6), st.integers(1, 4), max_size=5)


def _series(d, p):
    if not d:
        return LaurentSeries.zero(p)
    lo = min(d)
    return LaurentSeries.make(p, lo, [d.get(k, 0) for k in range(lo, max(d) + 1)], exact=True)


def _as_dict(s):
    return {s.val + k: c for k, c in enumerate(s.coeffs) if c}


# series arithmetic


@settings(max_examples=100, deadline=None)
@given(_laurent, _laurent, st.sampled_from([2, 3, 5]))
def test_exact_series_product_is_polynomial_product(a, b, p):
    a = {k: v % p for k, v in a.items() if v % p}
    b = {k: v % p for k, v in b.items() if v % p}
    assert _as_dict(_series(a, p) * _series(b, p)) == _poly_mul(a, b, p)


@settings(max_examples=60, deadline=None)
@given(_laurent, st.sampled_from([3, 5, 7]))
def test_inverse_times_self_is_one(a, p):
    a = {k: v % p for k, v in a.items() if v % p}
    if not a:
        return
    s = _series(a, p)
    inv = s.inverse(20)
    prod = s * inv
    assert prod.coeff(0) == 1
    for k in range(1, 15):
        assert prod.coeff(k) == 0


def test_precision_is_tracked():
    s = LaurentSeries.make(3, 0, [1, 1, 1])  # 1 + t + t^2 + O(t^3)
    assert s.prec == 3
    with pytest.raises(strat.PrecisionError):
        s.coeff(3)
    assert (s * s).prec == 3
    z = LaurentSeries.make(3, 0, [0, 0], prec=2)
    with pytest.raises(strat.PrecisionError):
        z.valuation()


def test_biseries_product():
    p = 5
    one = LaurentSeries.monomial(p, 0)
    a = BiSeries(p, (one, LaurentSeries.monomial(p, -1), LaurentSeries.zero(p)))  # 1 + t^-1 X + 0 X^2
    sq = a * a
    assert sq.N == 2
    with pytest.raises(strat.PrecisionError):
        sq[3]
    assert sq[1] == LaurentSeries.monomial(p, -1, 2)
    assert sq[2] == LaurentSeries.monomial(p, -2)


# tame case


@pytest.mark.parametrize("i,m,n,p,expected", [(0, 4, 0, 3, 1), (1, 2, 1, 3, 2), (2, 3, 1, 5, 4)])
def test_tame_examples(i, m, n, p, expected):
    assert strat.tame_coeff(i, m, n, p) == expected
    assert strat.tame_oracle(i, m, n, p) == expected


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 8), st.integers(0, 12), st.data())
def test_tame_coeff_matches_oracle(p, m, n, data):
    if m % p == 0:
        return
    i = data.draw(st.integers(0, m - 1))
    assert strat.tame_coeff(i, m, n, p) == strat.tame_oracle(i, m, n, p)


@pytest.mark.parametrize("k", range(2, 8))
def test_polynomial_case(k):
    assert strat.tame_coeff(0, 1, k, 5) == 0


def test_tame_rejects():
    with pytest.raises(ValueError):
        strat.tame_coeff(1, 3, 1, 3)
    with pytest.raises(ValueError):
        strat.tame_coeff(3, 3, 1, 5)
    with pytest.raises(strat.PrecisionError):
        strat.tame_oracle(1, 2, 5, 3, trunc=2)


def test_local_exponents():
    assert strat.local_exponents(4) == [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_tame_regular(p):
    for m in range(1, 9):
        if m % p == 0:
            continue
        for n in range(0, 12):
            assert strat.tame_f(n, m, p) <= n


# Artin-Schreier case


@pytest.mark.parametrize("p", [2, 3, 5])
def test_identity_holds(p):
    res = strat.as_series(p, 4, 30 * p)
    assert res.identity_ok


@pytest.mark.parametrize("p", [2, 3, 5])
def test_z_satisfies_defining_equation(p):
    z = strat.as_z(p, 40)
    lhs = LaurentSeries.monomial(p, -p) - LaurentSeries.monomial(p, -1)
    diff = lhs - z.inverse()
    for k in range(-p, 20):
        assert diff.coeff(k) == 0


@pytest.mark.parametrize("p", [2, 3, 5])
def test_first_derivatives(p):
    res = strat.as_series(p, 3, 30 * p)
    zi = strat.as_z(p, 30 * p).inverse()
    # d(t^-1) = z^-2, by differentiating t^-p - t^-1 = z^-1
    d_tinv = strat.as_derivative(res, -1, 1)
    target = zi * zi
    for k in range(d_tinv.val, d_tinv.val + 20):
        assert d_tinv.coeff(k) == target.coeff(k)
    # d(t) = -t^2 z^-2
    d_t = strat.as_derivative(res, 1, 1)
    target = (target * LaurentSeries.monomial(p, 2)).scale(-1)
    for k in range(d_t.val, d_t.val + 20):
        assert d_t.coeff(k) == target.coeff(k)
    assert d_t.valuation() == 2 - 2 * p


@pytest.mark.parametrize("p", [3, 5])
def test_first_derivative_is_a_derivation(p):
    res = strat.as_series(p, 2, 30 * p)
    dt = strat.as_derivative(res, 1, 1)
    for i in range(2, 5):
        lhs = strat.as_derivative(res, i, 1)
        rhs = (dt * LaurentSeries.monomial(p, i - 1)).scale(i)
        top = int(min(lhs.prec, rhs.prec))
        assert top > 40
        for k in range(2 - 2 * p, top):
            assert lhs.coeff(k) == rhs.coeff(k)


def test_f_examples():
    assert strat.as_f(1, 3).f == 2
    assert strat.as_f(1, 2).f == 1


def test_p2_second_derivative_valuation_by_hand():
    # R = A + A^2 + ..., A = X z^-2 - X^2 z^-3 + ...; X^2 coefficient of t/(1 + tR) has t-valuation
    # min(val(t^2 * z^-3), val(t^2 * z^-4), val(t^3 z^-4)) = 2 - 8 = -6 at p = 2
    assert strat.derivative_valuation(2, 2) == -6


@pytest.mark.parametrize("p", [2, 3, 5])
def test_irregular(p):
    res = strat.as_series(p, 5)
    assert any(strat.as_f(n, p, res=res).f > n for n in range(1, 6))
