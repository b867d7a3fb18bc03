"""Deformed oscillator algebra a†a = psi(N), aa† = psi(N+1) in a two-sided representation.

The basis vectors |n>, n in Z, are normalised by the two-sided psi-factorials

    psi(n)! = psi(mu+1) ... psi(mu+n)         n > 0
    psi(0)! = 1
    psi(n)! = psi(mu) psi(mu-1) ... psi(mu+n+1)   n < 0

Everything downstream only needs the unified moment sequence

    M(n) = psi(n)!  (n >= 0),   M(n) = 1 / psi(n)!  (n < 0),

which satisfies M(0) = 1 and M(n+1) = psi(mu+n+1) M(n) for every integer n.
All products are accumulated as sums of logarithms.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import (
    DivergentSeries,
    InvalidSpec,
    LimitUndetermined,
    NonPositivePsi,
    OutsideRing,
    ZeroPoint,
)

SERIES_CAP = 10**6
PROBE_EXPONENTS = range(4, 21)
PROBE_RTOL = 1e-6


# ---------------------------------------------------------------------------
# psi specifications
# ---------------------------------------------------------------------------


class PsiSpec:
    """A strictly positive deformation function psi.

    Subclasses implement :meth:`log_psi`; :meth:`limits` returns the limits of
    psi at -inf and +inf, or ``None`` when they have to be probed.
    """

    family = "abstract"

    def log_psi(self, x: float) -> float:
        raise NotImplementedError

    def __call__(self, x: float) -> float:
        return math.exp(self.log_psi(x))

    def limits(self):
        return None

    def describe(self) -> dict:
        return {"family": self.family}


@dataclass(frozen=True)
class QExp(PsiSpec):
    """psi(x) = lam * q**(-x), the q-oscillator family."""

    lam: float
    q: float
    family = "qexp"

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidSpec(f"lambda must be positive, got {self.lam}")
        if not 0 < self.q < 1:
            raise InvalidSpec(f"q must lie in (0, 1), got {self.q}")

    def log_psi(self, x):
        return math.log(self.lam) - x * math.log(self.q)

    def limits(self):
        return 0.0, math.inf

    def describe(self):
        return {"family": self.family, "lambda": self.lam, "q": self.q}


@dataclass(frozen=True)
class ExpPoly(PsiSpec):
    """psi(x) = exp(a0 + a1 x + ... + a_{2p+1} x^{2p+1}) with a_{2p+1} > 0."""

    coeffs: tuple
    family = "expoly"

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        degree = len(coeffs) - 1
        if degree < 1 or degree % 2 == 0:
            raise InvalidSpec(f"exponent polynomial must have odd degree, got {degree}")
        if not coeffs[-1] > 0:
            raise InvalidSpec("leading coefficient must be strictly positive")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def p(self) -> int:
        return (self.degree - 1) // 2

    def log_psi(self, x):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def limits(self):
        return 0.0, math.inf

    def describe(self):
        return {"family": self.family, "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class LogPowerDerived(PsiSpec):
    """psi induced by the weight F(x) = exp(-nu (ln x)^(2n)) through psi(r) = F^(r+1)/F^(r)."""

    nu: float
    n: int
    family = "logpower"

    def __post_init__(self):
        if not self.nu > 0:
            raise InvalidSpec(f"nu must be positive, got {self.nu}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidSpec(f"n must be a positive integer, got {self.n}")

    def log_psi(self, x):
        from .weight import log_psi_from_weight

        return log_psi_from_weight(self.nu, self.n, x)

    def limits(self):
        return 0.0, math.inf

    def describe(self):
        return {"family": self.family, "nu": self.nu, "n": self.n}


@dataclass(frozen=True)
class Custom(PsiSpec):
    """User callback x -> psi(x), with optional declared limits at -inf / +inf."""

    func: Callable[[float], float]
    limit_minus: Optional[float] = None
    limit_plus: Optional[float] = None
    name: str = "custom"
    family = "custom"

    def log_psi(self, x):
        value = self.func(x)
        if not value > 0 or math.isnan(value):
            raise NonPositivePsi(f"psi({x}) = {value} is not strictly positive")
        return math.log(value)

    def __call__(self, x):
        value = self.func(x)
        if not value > 0:
            raise NonPositivePsi(f"psi({x}) = {value} is not strictly positive")
        return value

    def limits(self):
        if self.limit_minus is None or self.limit_plus is None:
            return None
        return float(self.limit_minus), float(self.limit_plus)

    def describe(self):
        return {
            "family": self.family,
            "name": self.name,
            "limit_minus": self.limit_minus,
            "limit_plus": self.limit_plus,
        }


def psi_eval(spec: PsiSpec, x: float) -> float:
    """Evaluate psi(x), raising :class:`NonPositivePsi` on a non-positive value."""
    try:
        value = spec(x)
    except OverflowError:
        return math.inf
    if not value > 0:
        raise NonPositivePsi(f"psi({x}) = {value} is not strictly positive")
    return value


# ---------------------------------------------------------------------------
# representation, factorials and moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Representation:
    """Two-sided representation with N|n> = (mu + n)|n>.

    Only the fractional part of ``mu`` labels inequivalent representations;
    an integer shift of ``mu`` relabels the basis.
    """

    psi: PsiSpec
    mu: float = 0.0

    def log_psi(self, n: float) -> float:
        return self.psi.log_psi(self.mu + n)

    @property
    def label(self) -> float:
        return self.mu - math.floor(self.mu)


def as_representation(obj) -> Representation:
    if isinstance(obj, Representation):
        return obj
    if isinstance(obj, PsiSpec):
        return Representation(obj)
    raise TypeError(f"expected Representation or PsiSpec, got {type(obj).__name__}")


def log_moment(rep: Representation, n: int) -> float:
    """log M(n): sum of log psi(mu+i) for i = 1..n, or minus the sum over i = n+1..0."""
    rep = as_representation(rep)
    if n >= 0:
        return math.fsum(rep.log_psi(i) for i in range(1, n + 1))
    return -math.fsum(rep.log_psi(i) for i in range(n + 1, 1))


def log_psi_factorial(rep: Representation, n: int) -> float:
    lm = log_moment(rep, n)
    return lm if n >= 0 else -lm


def psi_factorial(rep: Representation, n: int) -> float:
    """Two-sided psi-factorial psi(mu+n)! with psi(mu)! = 1."""
    return math.exp(log_psi_factorial(rep, int(n)))


def ladder_coefficients(rep: Representation, n: int):
    """Matrix elements of a and a† on |n>: (psi(mu+n)^1/2, psi(mu+n+1)^1/2)."""
    rep = as_representation(rep)
    lower = psi_eval(rep.psi, rep.mu + n)
    upper = psi_eval(rep.psi, rep.mu + n + 1)
    return math.sqrt(lower), math.sqrt(upper)


@dataclass(frozen=True)
class FactorialTable:
    nmin: int
    nmax: int
    log_moments: np.ndarray = field(repr=False)

    def _index(self, n):
        if not self.nmin <= n <= self.nmax:
            raise IndexError(f"n = {n} outside table range [{self.nmin}, {self.nmax}]")
        return n - self.nmin

    def log_moment(self, n: int) -> float:
        return float(self.log_moments[self._index(n)])

    def moment(self, n: int) -> float:
        return math.exp(self.log_moment(n))

    def value(self, n: int) -> float:
        """psi(n)!"""
        lm = self.log_moment(n)
        return math.exp(lm if n >= 0 else -lm)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.nmin, self.nmax + 1)

    @property
    def values(self) -> dict:
        return {int(n): self.value(int(n)) for n in self.indices}

    @property
    def moments(self) -> dict:
        return {int(n): self.moment(int(n)) for n in self.indices}


def factorial_table(rep, nmin: int, nmax: int) -> FactorialTable:
    rep = as_representation(rep)
    nmin, nmax = min(int(nmin), 0), max(int(nmax), 0)
    logs = np.zeros(nmax - nmin + 1)
    zero = -nmin
    acc = 0.0
    for n in range(1, nmax + 1):
        acc += rep.log_psi(n)
        logs[zero + n] = acc
    acc = 0.0
    for n in range(-1, nmin - 1, -1):
        acc -= rep.log_psi(n + 1)
        logs[zero + n] = acc
    table = FactorialTable(nmin, nmax, logs)
    return table


# ---------------------------------------------------------------------------
# convergence radii
# ---------------------------------------------------------------------------


class Radii(NamedTuple):
    r1: float
    r2: float
    kind: str


def _probe_limit(spec: PsiSpec, sign: int) -> float:
    previous = None
    for k in PROBE_EXPONENTS:
        x = sign * 2.0**k
        try:
            value = spec(x)
        except OverflowError:
            value = math.inf
        if value == math.inf or value > 1e300:
            return math.inf
        if value < 1e-300:
            return 0.0
        if previous is not None and abs(value - previous) <= PROBE_RTOL * abs(previous):
            return value
        previous = value
    raise LimitUndetermined(f"psi did not stabilise at {'+' if sign > 0 else '-'}infinity")


def psi_limits(spec: PsiSpec):
    declared = spec.limits()
    if declared is not None:
        return declared
    return _probe_limit(spec, -1), _probe_limit(spec, +1)


def convergence_radii(spec) -> Radii:
    """Radii r1 = lim psi^1/2 at -inf and r2 = lim psi^1/2 at +inf of the coherent-state ring."""
    if isinstance(spec, Representation):
        spec = spec.psi
    lo, hi = psi_limits(spec)
    r1, r2 = math.sqrt(lo), math.sqrt(hi)
    if r1 >= r2:
        kind = "Empty"
    elif r1 == 0 and r2 == math.inf:
        kind = "FullPlane"
    else:
        kind = "Ring"
    return Radii(r1, r2, kind)


# ---------------------------------------------------------------------------
# two-sided series truncation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesWindow:
    """Index window [nmin, nmax] of sum_n x^n / M(n) with a certified tail bound at |x|."""

    nmin: int
    nmax: int
    log_moments: np.ndarray = field(repr=False)
    log_tail_bound: float
    log_abs_sum: float

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.nmin, self.nmax + 1)

    @property
    def tail_bound(self) -> float:
        return math.exp(min(self.log_tail_bound, 709.0)) if self.log_tail_bound < 709 else math.inf


def _logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))


def _walk(next_log_ratio, log_tol, cap, ratio_cut=0.5):
    """Accumulate log-terms in one direction until a geometric tail bound certifies the rest.

    ``next_log_ratio(k)`` returns log(t_k / t_{k-1}) for k = 1, 2, ...; t_0 = 1 is
    excluded here. Returns (log_terms, log_tail). The tail is certified relative to
    max(1, side sum), all in log space so huge kernels do not overflow.
    """
    log_terms = []
    log_t = 0.0
    log_sum = -math.inf
    history = []
    log_ratio = next_log_ratio(1)
    for k in range(1, cap + 1):
        log_t += log_ratio
        log_terms.append(log_t)
        log_sum = _logaddexp(log_sum, log_t)
        log_ratio = next_log_ratio(k + 1)
        history.append(log_ratio)
        if log_ratio >= 0:
            continue
        steady = len(history) >= 4 and all(
            history[-i] <= history[-i - 1] + 1e-15 for i in range(1, 4)
        )
        long_steady = len(history) >= 16 and all(
            history[-i] <= history[-i - 1] + 1e-15 for i in range(1, 16)
        )
        if not (steady and log_ratio < math.log(ratio_cut)) and not long_steady:
            continue
        # t_k * r / (1 - r)
        log_tail = log_t + log_ratio - math.log1p(-math.exp(log_ratio))
        if log_tail <= log_tol + max(log_sum, 0.0) or log_t < -740:
            return log_terms, log_tail
    raise DivergentSeries(f"two-sided series not certified within {cap} terms per side")


def series_window(rep, modulus: float, tol: float, cap: int = SERIES_CAP) -> SeriesWindow:
    """Truncation window for sum_n modulus^n / M(n), certified by a ratio-test majorant.

    Positive side: t_{n+1}/t_n = |x| / psi(n+1); negative side: t_{n-1}/t_n = psi(n) / |x|.
    """
    rep = as_representation(rep)
    if not modulus > 0:
        raise ZeroPoint("series argument must be nonzero")
    log_r = math.log(modulus)
    log_tol = math.log(tol)
    pos, pos_tail = _walk(lambda k: log_r - rep.log_psi(k), log_tol, cap)
    neg, neg_tail = _walk(lambda k: rep.log_psi(1 - k) - log_r, log_tol, cap)
    # log_terms hold n*log|x| - log M(n); recover log M(n)
    nmax, nmin = len(pos), -len(neg)
    log_m = np.empty(nmax - nmin + 1)
    log_m[-nmin] = 0.0
    for i, lt in enumerate(pos, start=1):
        log_m[-nmin + i] = i * log_r - lt
    for i, lt in enumerate(neg, start=1):
        log_m[-nmin - i] = -i * log_r - lt
    log_terms = np.concatenate([neg[::-1], [0.0], pos])
    log_partial = float(np.logaddexp.reduce(log_terms))
    log_tail = float(np.logaddexp(pos_tail, neg_tail))
    return SeriesWindow(nmin, nmax, log_m, log_tail, log_partial)


# ---------------------------------------------------------------------------
# coherent vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoherentVector:
    """Truncated eigenvector of a: c_n = z^n / M(n)^(1/2), n in [nmin, nmax]."""

    z: complex
    nmin: int
    nmax: int
    coefficients: np.ndarray = field(repr=False)
    tail_bound: float

    @property
    def truncation(self):
        return self.nmin, self.nmax

    def coefficient(self, n: int) -> complex:
        return complex(self.coefficients[n - self.nmin])

    def squared_norm(self) -> float:
        return math.fsum(np.abs(self.coefficients) ** 2)

    def partial_squared_norms(self) -> np.ndarray:
        """Squared-norm partial sums, accumulating outward from n = 0 by magnitude order."""
        weights = np.abs(self.coefficients) ** 2
        order = np.argsort(np.abs(np.arange(self.nmin, self.nmax + 1)), kind="stable")
        return np.cumsum(weights[order])

    def eigen_residual(self, rep) -> float:
        """max_n |c_n psi(n)^(1/2) - z c_{n-1}| over interior n."""
        rep = as_representation(rep)
        worst = 0.0
        for n in range(self.nmin + 1, self.nmax + 1):
            lhs = self.coefficient(n) * math.exp(0.5 * rep.log_psi(n))
            rhs = self.z * self.coefficient(n - 1)
            worst = max(worst, abs(lhs - rhs))
        return worst


def coherent_vector(rep, z: complex, norm_tail_tol: float = 1e-14) -> CoherentVector:
    rep = as_representation(rep)
    z = complex(z)
    if z == 0:
        raise ZeroPoint("coherent vectors are defined for z != 0 only")
    r1, r2, _ = convergence_radii(rep.psi)
    if not r1 < abs(z) < r2:
        raise OutsideRing(f"|z| = {abs(z)} outside the ring ({r1}, {r2})")
    window = series_window(rep, abs(z) ** 2, norm_tail_tol)
    n = window.indices
    log_z = cmath.log(z)
    coeffs = np.exp(n * log_z - 0.5 * window.log_moments)
    return CoherentVector(z, window.nmin, window.nmax, coeffs, window.tail_bound)


def basis_function_values(rep, coeffs: dict, z):
    """f(z) = sum_n f_n z^n / M(n)^(1/2) for finitely supported coefficients f_n."""
    rep = as_representation(rep)
    keys = sorted(coeffs)
    table = factorial_table(rep, min(keys[0], 0), max(keys[-1], 0))
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    for n in keys:
        out += coeffs[n] * z**n * math.exp(-0.5 * table.log_moment(n))
    return out


def coefficient_norm(coeffs: dict) -> float:
    return math.sqrt(math.fsum(abs(c) ** 2 for c in coeffs.values()))


def as_coeff_dict(coeffs) -> dict:
    """Accept a {n: f_n} mapping or a (nmin, sequence) pair."""
    if isinstance(coeffs, dict):
        return {int(k): complex(v) for k, v in coeffs.items()}
    start, values = coeffs
    return {int(start) + i: complex(v) for i, v in enumerate(values)}


__all__ = [
    "PsiSpec",
    "QExp",
    "ExpPoly",
    "LogPowerDerived",
    "Custom",
    "psi_eval",
    "Representation",
    "log_moment",
    "psi_factorial",
    "log_psi_factorial",
    "ladder_coefficients",
    "FactorialTable",
    "factorial_table",
    "Radii",
    "convergence_radii",
    "psi_limits",
    "SeriesWindow",
    "series_window",
    "CoherentVector",
    "coherent_vector",
    "basis_function_values",
]
