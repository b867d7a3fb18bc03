from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st
from scipy.special import bernoulli as scipy_bernoulli

from dbarg.bernoulli import bernoulli_numbers, bernoulli_poly, bernoulli_poly_coeffs, exact_poly_sum
from dbarg.errors import DegreeTooLarge


def test_examples():
    assert bernoulli_poly(1, 0.0) == -0.5
    assert bernoulli_poly(2, 0.0) == pytest.approx(1 / 6, rel=1e-15)
    diff = bernoulli_poly(5, 2.7) - bernoulli_poly(5, 1.7)
    assert diff == pytest.approx(5 * 1.7**4, rel=1e-12)


def test_numbers_match_scipy():
    ours = [float(b) for b in bernoulli_numbers(30)]
    theirs = scipy_bernoulli(30)
    for k, (a, b) in enumerate(zip(ours, theirs)):
        if k == 1:
            assert a == -0.5  # same convention as scipy
        # scipy's table is float-accurate only to ~1e-11; ours is exact
        assert a == pytest.approx(b, rel=1e-9)
    assert bernoulli_numbers(4)[4] == Fraction(-1, 30)


@pytest.mark.parametrize("k", [1, 2, 3, 6, 11, 20])
def test_polynomials_match_sympy(k):
    x = sympy.Symbol("x")
    expected = sympy.Poly(sympy.bernoulli(k, x), x).all_coeffs()[::-1]
    assert [sympy.Rational(c.numerator, c.denominator) for c in bernoulli_poly_coeffs(k)] == expected


def test_degree_cap():
    bernoulli_poly_coeffs(64)
    with pytest.raises(DegreeTooLarge):
        bernoulli_poly(65, 0.5)


def test_complex_argument():
    z = 0.5 + 1.5j
    x = sympy.Symbol("x")
    expected = complex(sympy.bernoulli(6, x).subs(x, sympy.Rational(1, 2) + sympy.Rational(3, 2) * sympy.I).evalf())
    assert bernoulli_poly(6, z) == pytest.approx(expected, rel=1e-13)


def test_exact_sum_is_exact_on_rationals():
    assert exact_poly_sum([(Fraction(1, 2), 2)], 0.0) == pytest.approx(1 / 12, rel=1e-16)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(1, 12), rho=st.floats(-5.0, 5.0))
def test_difference_identity(k, rho):
    lhs = bernoulli_poly(k, rho + 1) - bernoulli_poly(k, rho)
    rhs = k * rho ** (k - 1)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12 * max(1.0, abs(rho)) ** k)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(0, 16), rho=st.floats(-3.0, 3.0))
def test_reflection(k, rho):
    # B_k(1 - x) = (-1)^k B_k(x)
    assert bernoulli_poly(k, 1 - rho) == pytest.approx((-1) ** k * bernoulli_poly(k, rho),
                                                       rel=1e-10, abs=1e-9)
