"""Reproducing kernel G(x) = sum_{n>=0} x^n / psi(n)! + sum_{n<0} x^n psi(n)! = sum_n x^n / M(n).

The series is truncated with a ratio-test certificate (see
:func:`dbarg.algebra.series_window`).  For the q-oscillator the kernel has the
theta-function closed form implemented in :func:`kernel_G_q_closed`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    as_coeff_dict,
    as_representation,
    basis_function_values,
    coefficient_norm,
    convergence_radii,
    factorial_table,
    series_window,
)
from .errors import OutsideDomain, ZeroPoint

DEFAULT_TOL = 1e-15


@dataclass(frozen=True)
class KernelEval:
    x: complex
    value: complex
    tail_bound: float
    terms_used: tuple


def _check_domain(rep, x):
    if x == 0:
        raise ZeroPoint("G has negative powers; x = 0 is excluded")
    r1, r2, kind = convergence_radii(rep.psi)
    if kind == "FullPlane":
        return
    if not r1 * r1 < abs(x) < r2 * r2:
        raise OutsideDomain(f"|x| = {abs(x)} outside the annulus ({r1 * r1}, {r2 * r2})")


def _fsum_complex(terms) -> complex:
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def kernel_G(rep, x, tol: float = DEFAULT_TOL) -> KernelEval:
    """Certified evaluation of G(x): |G(x) - value| <= tail_bound <= tol * max(1, sum |terms|)."""
    rep = as_representation(rep)
    _check_domain(rep, x)
    window = series_window(rep, abs(x), tol)
    n = window.indices
    if isinstance(x, (int, float, np.floating)) and x > 0:
        terms = np.exp(n * math.log(x) - window.log_moments)
        value = math.fsum(terms)
    else:
        x = complex(x)
        terms = np.exp(n * cmath.log(x) - window.log_moments)
        value = _fsum_complex(terms)
        if x.imag == 0:
            value = complex(value.real, 0.0)
    return KernelEval(x, value, window.tail_bound, (window.nmin, window.nmax))


def log_kernel_G(rep, x: float, tol: float = DEFAULT_TOL) -> float:
    """log G(x) for real x > 0, summed in log space (G may exceed the double range)."""
    rep = as_representation(rep)
    _check_domain(rep, x)
    window = series_window(rep, x, tol)
    log_terms = window.indices * math.log(x) - window.log_moments
    return float(np.logaddexp.reduce(log_terms))


def kernel_G_from_mellin(mellin, x: float, tol: float = DEFAULT_TOL) -> float:
    """G(x) = F^(1) sum_n x^n / F^(n+1), using a Mellin transform in place of the factorials."""
    window = series_window(as_representation(mellin.psi), abs(x), tol)
    log_f1 = mellin.log(1.0)
    terms = [
        math.exp(int(n) * math.log(x) + log_f1 - mellin.log(float(n) + 1.0))
        for n in window.indices
    ]
    return math.fsum(terms)


def G0_q(lam: float, q: float, x):
    """G^0(x) = exp(-ln^2(x/lam) / (2 ln q) - ln(x/lam) / 2); solves lam G(x/q) = x G(x)."""
    L = np.log(np.asarray(x, dtype=float) / lam)
    out = np.exp(-L * L / (2 * math.log(q)) - 0.5 * L)
    return float(out) if out.ndim == 0 else out


def theta_factor(lam: float, q: float, x: float) -> float:
    """sum_n exp((ln q / 2) (n + 1/2 + ln(x/lam) / ln q)^2), periodic in ln(x/lam)/ln q."""
    lq = math.log(q)
    s = 0.5 + math.log(x / lam) / lq
    center = -round(s)
    # terms below exp(-45) relative to the largest are negligible
    half_width = int(math.ceil(math.sqrt(90.0 / -lq))) + 2
    return math.fsum(
        math.exp(0.5 * lq * (n + s) ** 2) for n in range(center - half_width, center + half_width + 1)
    )


def kernel_G_q_closed(lam: float, q: float, x: float) -> float:
    """q^(-1/8) G^0(x) times the periodic theta factor; equals the q-oscillator kernel series."""
    if not (lam > 0 and 0 < q < 1 and x > 0):
        raise OutsideDomain("need lam > 0, 0 < q < 1, x > 0")
    return q ** (-0.125) * G0_q(lam, q, x) * theta_factor(lam, q, x)


def kernel_feq_residual(rep, x: float, tol: float = DEFAULT_TOL, method: str = "termwise") -> float:
    """Residual of x G(x) = psi(x d/dx) G(x).

    ``termwise`` applies psi(x d/dx) x^n = psi(n) x^n to each series term;
    ``shift`` (q-oscillator only) compares x G(x) with lam G(x/q).
    """
    rep = as_representation(rep)
    lhs = x * kernel_G(rep, x, tol).value
    if method == "shift":
        spec = rep.psi
        rhs = spec.lam * kernel_G(rep, x / spec.q, tol).value
        return abs(lhs - rhs)
    window = series_window(rep, abs(x), tol)
    terms = [
        math.exp(rep.log_psi(int(n)) + int(n) * math.log(x) - lm)
        for n, lm in zip(window.indices, window.log_moments)
    ]
    return abs(lhs - math.fsum(terms))


def coefficient_identity_residual(rep, nmin: int, nmax: int) -> float:
    """max |psi(n) g_n - g_{n-1}| / g_{n-1} with g_n = 1 / M(n) on a factorial table."""
    rep = as_representation(rep)
    table = factorial_table(rep, nmin - 1, nmax)
    worst = 0.0
    for n in range(nmin, nmax + 1):
        d = rep.log_psi(n) - table.log_moment(n) + table.log_moment(n - 1)
        worst = max(worst, abs(math.expm1(d)))
    return worst


def coherent_overlap(rep, zeta: complex, z: complex, tol: float = DEFAULT_TOL) -> complex:
    """<zbar|zeta> = G(zeta z)."""
    return complex(kernel_G(rep, complex(zeta) * complex(z), tol).value)


def pointwise_bound_check(rep, coeffs, z: complex, tol: float = 1e-12) -> bool:
    """|f(z)| <= ||f|| G(|z|^2)^(1/2) + tol for a finitely supported f."""
    rep = as_representation(rep)
    coeffs = as_coeff_dict(coeffs)
    value = complex(basis_function_values(rep, coeffs, complex(z)))
    g = kernel_G(rep, abs(z) ** 2).value.real
    return abs(value) <= coefficient_norm(coeffs) * math.sqrt(g) + tol
