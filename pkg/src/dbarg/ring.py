"""Coherent states confined to a ring: the weight equation forces F = 0.

Two cases with q > 1:

    exterior   psi(x) = 1 + q^x          ring |z| > 1,  (q x - 1) F(q x) = F(x)
    disk       psi(x) = q^x / (1 + q^x)  ring |z| < 1,  x F(x) = (1 - x/q) F(x/q)

Starting from the support constraint (F = 0 outside (r1^2, r2^2)) each
application of the recursion extends the vanishing set by a factor q.  The
isolated points where the multiplier vanishes are excluded; grids are offset
by half a step so they never hit them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .algebra import Custom
from .errors import InvalidSpec

VARIANTS = ("exterior", "disk")


@dataclass(frozen=True)
class RingCase:
    variant: str
    q: float

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidSpec(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not self.q > 1:
            raise InvalidSpec(f"q must exceed 1, got {self.q}")

    def psi(self) -> Custom:
        q = self.q
        if self.variant == "exterior":
            return Custom(lambda x: 1.0 + q**x, 1.0, math.inf, name=f"1+{q}^x")
        return Custom(lambda x: 1.0 / (1.0 + q ** (-x)), 0.0, 1.0, name=f"{q}^x/(1+{q}^x)")

    @property
    def radii(self):
        return (1.0, math.inf) if self.variant == "exterior" else (0.0, 1.0)

    @property
    def support(self):
        r1, r2 = self.radii
        return r1 * r1, r2 * r2


def ring_feq(case: RingCase, F: Callable, x: float) -> float:
    """Residual of the ring-case functional equation for a candidate F at x > 0."""
    q = case.q
    if case.variant == "exterior":
        return abs((q * x - 1.0) * F(q * x) - F(x))
    return abs(x * F(x) - (1.0 - x / q) * F(x / q))


def vanishing_propagation(case, q: Optional[float] = None, steps: int = 1):
    """Interval on which F must vanish after ``steps`` applications of the recursion.

    exterior: (0, q^steps); disk: (q^-steps, inf).  steps = 0 is the bare
    support constraint.
    """
    if isinstance(case, str):
        case = RingCase(case, q)
    q = case.q if q is None else q
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if case.variant == "exterior":
        return 0.0, q**steps
    return q ** (-steps), math.inf


def steps_to_cover(case: RingCase, x: float) -> int:
    """Smallest step count whose vanishing interval contains x."""
    if case.variant == "exterior":
        return max(0, math.floor(math.log(x) / math.log(case.q)) + 1)
    return max(0, math.floor(-math.log(x) / math.log(case.q)) + 1)


@dataclass(frozen=True)
class GeometricGrid:
    """x_k = x0 q^(k/m), k = kmin..kmax; x -> q x maps k -> k + m."""

    q: float
    m: int
    kmin: int
    kmax: int
    x0: float

    @classmethod
    def for_case(cls, case: RingCase, steps: int, m: int = 8) -> "GeometricGrid":
        x0 = case.q ** (0.5 / m)
        if case.variant == "exterior":
            return cls(case.q, m, -2 * m, steps * m - 1, x0)
        return cls(case.q, m, -steps * m - 1, 2 * m, x0)

    @property
    def x(self) -> np.ndarray:
        k = np.arange(self.kmin, self.kmax + 1)
        return self.x0 * self.q ** (k / self.m)


def no_weight_certificate(case: RingCase, F, tol: float = 1e-12, steps: int = 8,
                          grid: Optional[GeometricGrid] = None) -> dict:
    """Certify that any grid function obeying the equation to ``tol`` is O(tol) on the propagated interval.

    ``F`` is a callable or an array of values on ``grid``.  The bound B_k on
    |F(x_k)| is propagated from the support region through the recursion,
    each step adding the admitted residual ``tol``; C = max B_k / tol.
    """
    grid = grid or GeometricGrid.for_case(case, steps)
    x = grid.x
    values = np.asarray(F(x) if callable(F) else F, dtype=float)
    if values.shape != x.shape:
        raise ValueError("F values do not match the grid")
    q, m = case.q, grid.m
    lo_sup, hi_sup = case.support
    outside = (x <= lo_sup) | (x >= hi_sup)
    support_violation = float(np.max(np.abs(values[outside]), initial=0.0))

    residuals = []
    bound = np.zeros_like(x)
    if case.variant == "exterior":
        for i in range(len(x) - m):
            residuals.append((x[i + m] - 1.0) * values[i + m] - values[i])
        for i in range(len(x)):
            if outside[i]:
                bound[i] = tol
            elif i >= m:
                bound[i] = (bound[i - m] + tol) / abs(x[i] - 1.0)
            else:
                bound[i] = math.inf
        lo, hi = vanishing_propagation(case, steps=steps)
        inside = (x >= lo_sup) & (x < hi)
    else:
        for i in range(m, len(x)):
            residuals.append(x[i] * values[i] - (1.0 - x[i] / q) * values[i - m])
        for i in range(len(x) - 1, -1, -1):
            if outside[i]:
                bound[i] = tol
            elif i + m < len(x):
                bound[i] = (x[i + m] * bound[i + m] + tol) / abs(1.0 - x[i])
            else:
                bound[i] = math.inf
        lo, hi = vanishing_propagation(case, steps=steps)
        inside = (x > lo) & (x <= hi_sup)

    max_residual = float(np.max(np.abs(residuals), initial=0.0))
    constant = float(np.max(bound[inside]) / tol) if tol > 0 else math.inf
    sup_norm = float(np.max(np.abs(values[inside]), initial=0.0))
    consistent = max_residual <= tol and support_violation <= tol
    return {
        "variant": case.variant,
        "q": q,
        "steps": steps,
        "interval": [lo, hi],
        "C": constant,
        "max_residual": max_residual,
        "support_violation": support_violation,
        "violation_scale": max(max_residual, support_violation),
        "sup_norm": sup_norm,
        "consistent": consistent,
        "certificate_holds": consistent and sup_norm <= tol * constant,
    }
