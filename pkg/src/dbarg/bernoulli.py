"""Bernoulli numbers and polynomials.

Numbers come from the recurrence sum_{j=0}^{m} C(m+1, j) B_j = 0 (so B_1 = -1/2),
kept as exact fractions.  Real arguments are evaluated exactly and rounded once;
complex arguments use floating-point Horner.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .errors import DegreeTooLarge

MAX_DEGREE = 64


@lru_cache(maxsize=None)
def bernoulli_numbers(kmax: int) -> tuple:
    numbers = [Fraction(1)]
    for m in range(1, kmax + 1):
        acc = sum(comb(m + 1, j) * numbers[j] for j in range(m))
        numbers.append(-acc / (m + 1))
    return tuple(numbers)


@lru_cache(maxsize=None)
def bernoulli_poly_coeffs(k: int) -> tuple:
    """Coefficients of B_k in ascending powers, as fractions."""
    if k > MAX_DEGREE:
        raise DegreeTooLarge(f"degree {k} exceeds {MAX_DEGREE}")
    if k < 0:
        raise ValueError("degree must be nonnegative")
    b = bernoulli_numbers(k)
    # B_k(x) = sum_j C(k, j) B_j x^{k-j}
    return tuple(comb(k, k - i) * b[k - i] for i in range(k + 1))


def _horner(coeffs, x):
    acc = coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def bernoulli_poly(k: int, rho):
    """B_k(rho) for real or complex ``rho`` (scalars or numpy arrays)."""
    coeffs = bernoulli_poly_coeffs(k)
    if isinstance(rho, (int, float, np.floating, np.integer)):
        return float(_horner(coeffs, Fraction(float(rho))))
    return _horner([float(c) for c in coeffs], rho)


def exact_poly_sum(terms, rho: float) -> float:
    """Evaluate sum_i w_i B_{k_i}(rho) exactly for real rho; ``terms`` is [(w_i, k_i)]."""
    x = Fraction(float(rho))
    total = Fraction(0)
    for weight, k in terms:
        total += Fraction(weight) * _horner(bernoulli_poly_coeffs(k), x)
    return float(total)
