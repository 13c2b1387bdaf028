"""Finite-field arithmetic against brute-force polynomial arithmetic."""

from fractions import Fraction
from itertools import product
from math import comb, factorial

import pytest
from hypothesis import given, settings, strategies as st

from mumford import ff

FIELDS = [(2, 1), (2, 3), (3, 2), (5, 1), (7, 2), (2, 4)]


@pytest.mark.parametrize("q,expected", [(9, (3, 2)), (8, (2, 3)), (7, (7, 1)), (125, (5, 3))])
def test_prime_power(q, expected):
    assert ff.prime_power(q) == expected


@pytest.mark.parametrize("q", [1, 6, 12, 0, -4])
def test_prime_power_rejects(q):
    with pytest.raises(ValueError):
        ff.prime_power(q)


def test_field_rejects_bad_input():
    with pytest.raises(ValueError):
        ff.field_make(4, 1)
    with pytest.raises(ValueError):
        ff.field_make(3, 0)


@pytest.mark.parametrize("p,s", FIELDS)
def test_field_axioms_exhaustive(p, s):
    F = ff.field_make(p, s)
    elems = list(F.elements())
    assert len(elems) == p**s
    for a in elems:
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1
            assert F.pow(a, F.q - 1) == 1
    # multiplicative group is cyclic with a primitive generator
    assert F.element_order(F.gen) == F.q - 1


@pytest.mark.parametrize("p,s", FIELDS)
def test_coefficients_match_polynomial_product(p, s):
    F = ff.field_make(p, s)
    mod = list(F.modulus)
    for a, b in product(range(F.q), repeat=2):
        ca, cb = F.coeffs(a), F.coeffs(b)
        prod = [0] * (2 * s - 1)
        for i, x in enumerate(ca):
            for j, y in enumerate(cb):
                prod[i + j] = (prod[i + j] + x * y) % p
        for k in range(len(prod) - 1, s - 1, -1):
            c = prod[k]
            if c:
                for t in range(s + 1):
                    prod[k - s + t] = (prod[k - s + t] - c * mod[t]) % p
        assert F.coeffs(F.mul(a, b)) == prod[:s] + [0] * (s - len(prod[:s]))


@pytest.mark.parametrize("small,big", [((2, 2), (2, 4)), ((3, 1), (3, 2)), ((2, 1), (2, 3))])
def test_embedding_is_a_ring_homomorphism(small, big):
    K, E = ff.field_make(*small), ff.field_make(*big)
    for a, b in product(range(K.q), repeat=2):
        assert ff.embed(K, E, K.add(a, b)) == E.add(ff.embed(K, E, a), ff.embed(K, E, b))
        assert ff.embed(K, E, K.mul(a, b)) == E.mul(ff.embed(K, E, a), ff.embed(K, E, b))
    assert len({ff.embed(K, E, a) for a in range(K.q)}) == K.q


@pytest.mark.parametrize("p,s", [(3, 2), (5, 1), (7, 1), (2, 3)])
def test_sqrt(p, s):
    F = ff.field_make(p, s)
    squares = {F.mul(a, a) for a in range(F.q)}
    for a in range(F.q):
        assert F.is_square(a) == (a in squares)
        r = F.sqrt(a)
        if a in squares:
            assert F.mul(r, r) == a
        else:
            assert r is None


def _binom_rational_mod(x: Fraction, n: int, p: int) -> int:
    num = Fraction(1)
    for k in range(n):
        num *= x - k
    val = num / factorial(n)
    return val.numerator * pow(val.denominator, -1, p) % p


@settings(max_examples=200, deadline=None)
@given(p=st.sampled_from([2, 3, 5, 7]), m=st.integers(1, 12), n=st.integers(0, 25), i=st.integers(0, 11))
def test_binom_padic_matches_rational_binomial(p, m, n, i):
    if m % p == 0:
        return
    i = i % m
    assert ff.binom_padic(i, m, n, p) == _binom_rational_mod(Fraction(i, m), n, p)


@settings(max_examples=100, deadline=None)
@given(p=st.sampled_from([2, 3, 5]), a=st.integers(0, 200), n=st.integers(0, 200))
def test_binom_padic_integer_case_is_lucas(p, a, n):
    assert ff.binom_padic(a, 1, n, p) == comb(a, n) % p


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 8), min_size=9, max_size=9), st.lists(st.integers(0, 8), min_size=9, max_size=9))
def test_det_is_multiplicative(A, B):
    F = ff.field_make(3, 2)
    AB = ff.mat_mul(F, A, B, 3)
    assert ff.mat_det(F, AB, 3) == F.mul(ff.mat_det(F, A, 3), ff.mat_det(F, B, 3))


def test_deterministic_moduli():
    assert ff.field_make(3, 1).modulus == (0, 1)
    assert ff.field_make(2, 2).modulus == (1, 1, 1)
    assert ff.field_make(3, 2).modulus == (1, 0, 1)
    assert ff.field_make(3, 2).modulus == ff.field_make(3, 2).modulus


def test_least_irreducible_quadratic_over_f3_by_scan():
    def irreducible(c0, c1):
        return all((x * x + c1 * x + c0) % 3 for x in range(3))

    least = min((c1, c0) for c0 in range(3) for c1 in range(3) if irreducible(c0, c1))
    assert (least[1], least[0], 1) == ff.field_make(3, 2).modulus


@pytest.mark.parametrize("i,m,n,p,expected", [(1, 2, 0, 3, 1), (1, 2, 1, 3, 2)])
def test_binom_padic_examples(i, m, n, p, expected):
    assert ff.binom_padic(i, m, n, p) == expected


def test_binom_padic_rejects():
    with pytest.raises(ValueError):
        ff.binom_padic(1, 3, 2, 3)


def test_proj_canon_examples():
    F3, F5 = ff.field_make(3, 1), ff.field_make(5, 1)
    assert ff.proj_canon(F3, [[2, 0], [0, 2]]).entries == (1, 0, 0, 1)
    assert ff.proj_canon(F3, [[0, 2], [1, 0]]).entries == (0, 1, 2, 0)
    assert ff.proj_canon(F5, [[2, 0], [0, 1]]).entries == (1, 0, 0, 3)
    with pytest.raises(ValueError):
        ff.proj_canon(F5, [[1, 2], [2, 4]])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=9, max_size=9), st.integers(1, 6))
def test_proj_canon_scale_invariant(M, c):
    F = ff.field_make(7, 1)
    if ff.mat_det(F, M, 3) == 0:
        return
    assert ff.proj_canon(F, M) == ff.proj_canon(F, [F.mul(c, x) for x in M])
