import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pastwalk.poly import (
    NEG_INF,
    Polynomial,
    add,
    bernoulli,
    degree,
    evaluate,
    mul,
    range_sum,
    window_sum,
    window_sum_bounds,
)

n = Polynomial.monomial(1)

rationals = st.fractions(min_value=-10, max_value=10, max_denominator=12)
polys = st.lists(rationals, max_size=7).map(Polynomial)


def test_add_examples():
    assert add(n + 1, -n + 3) == Polynomial([4])
    q = Polynomial([1, 2, 3])
    assert add(Polynomial(), q) == q
    left = Polynomial([9, -6, 1]) * Fraction(1, 2)
    right = Polynomial([25, 10, 1]) * Fraction(1, 2)
    assert add(left, right) == Polynomial([17, 2, 1])


def test_mul_examples():
    assert mul(n + 1, n + 1) == Polynomial([1, 2, 1])
    assert mul(n + 1, Polynomial()) == Polynomial()
    assert mul(-n + 3, -n + 3) == Polynomial([9, -6, 1])


def test_eval_examples():
    assert evaluate(Polynomial([1, 2, 1]), 3) == 16
    assert evaluate(Polynomial(), Fraction(7, 3)) == 0
    assert evaluate(Polynomial([4]), 10**6) == 4


def test_degree_examples():
    assert degree(Polynomial([20, 2, 1])) == 2
    assert degree(Polynomial([4])) == 0
    assert degree(Polynomial()) == NEG_INF


def test_canonical_form():
    p = Polynomial([1, 2, 0, 0])
    assert p.coeffs == [1, 2]
    assert p.degree() == len(p.coeffs) - 1
    assert (n - n).coeffs == []


def test_range_sum_examples():
    assert range_sum(n * n)(4) == 30
    assert range_sum(Polynomial([1])) == n
    sq = (n + 1) * (n + 1)
    lo, hi = 101, math.ceil(1.5 * 100)
    brute = sum((i + 1) ** 2 for i in range(lo, hi + 1))
    assert window_sum(sq, lo, hi) == brute


@settings(max_examples=60, deadline=None)
@given(polys, polys, st.lists(rationals, min_size=20, max_size=20))
def test_ring_homomorphism(p, q, xs):
    for x in xs:
        assert evaluate(p + q, x) == evaluate(p, x) + evaluate(q, x)
        assert evaluate(p * q, x) == evaluate(p, x) * evaluate(q, x)


@settings(max_examples=60, deadline=None)
@given(polys, polys)
def test_degree_of_product(p, q):
    if p.is_zero or q.is_zero:
        assert (p * q).is_zero
    else:
        assert degree(p * q) == degree(p) + degree(q)


@pytest.mark.parametrize("deg", range(7))
def test_range_sum_matches_loop(deg):
    p = Polynomial([Fraction(k + 1, 3) * (-1) ** k for k in range(deg + 1)])
    s = range_sum(p)
    acc = Fraction(0)
    for N in range(1, 10_001):
        acc += evaluate(p, N)
        if N % 997 == 0 or N <= 20 or N == 10_000:
            assert s(N) == acc
    assert s(0) == 0


def test_bernoulli_numbers():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(3) == 0
    assert bernoulli(12) == Fraction(-691, 2730)


def test_fractional_exponents():
    root = Polynomial.monomial(Fraction(1, 2))
    assert root.degree() == Fraction(1, 2)
    assert not root.is_integral
    assert root.eval_float(16) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        range_sum(root)
    with pytest.raises(ValueError):
        root.coeffs


@pytest.mark.parametrize("lo,hi", [(1, 50), (10, 5000), (1000, 300_000)])
def test_window_bounds_bracket_the_sum(lo, hi):
    p = 3 * Polynomial.monomial(Fraction(1, 2)) - Polynomial.monomial(Fraction(1, 4))
    low, high = window_sum_bounds(p, lo, hi)
    exact = math.fsum(p.eval_float(i) for i in range(lo, hi + 1))
    assert low <= exact <= high
    assert high - low <= 1e-3 * abs(exact) + 1e-9


def test_str_and_float_coercion():
    assert str(Polynomial([1, 2, 1])) == "n^2 + 2n + 1"
    assert str(-n + 3) == "-n + 3"
    assert Polynomial([0.99]).coeffs == [Fraction(99, 100)]
