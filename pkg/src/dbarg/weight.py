"""Weight functions F solving x F(x) = psi(-x d/dx) F(x) and their Mellin transforms.

In Mellin space the functional equation becomes F^(rho+1) = psi(rho) F^(rho),
with F^(rho) = int_0^inf F(x) x^(rho-1) dx.  Weights are normalised to
M(0) = F^(1) = 1 unless stated otherwise.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .algebra import ExpPoly, PsiSpec, QExp, as_representation
from .bernoulli import bernoulli_poly, exact_poly_sum
from .errors import (
    DecayTooSlow,
    InvalidSpec,
    NonDecayingIntegrand,
    NotPeriodic,
    OutsideDomain,
    NotPositive,
    QuadratureNoConvergence,
    UnsupportedProvenance,
)
from .quadrature import find_cutoffs, integrate, integrate_line, radial_moment

PERIODICITY_POINTS = 32
PERIODICITY_RTOL = 1e-10
# moments of numerically inverted weights: fixed bracket of this many u_scales
NUMERIC_HALFWIDTH = 7.0
# ... and no tighter than this, since every sample is itself a quadrature
NUMERIC_RTOL_FLOOR = 1e-8
NUMERIC_MAX_NODES = 1500
POSITIVITY_GRID = 512


class Provenance(str, enum.Enum):
    Q_CLOSED_FORM = "QClosedForm"
    BERNOULLI_MELLIN = "BernoulliMellin"
    NUMERIC_INVERSE_MELLIN = "NumericInverseMellin"
    USER_GIVEN = "UserGiven"


class Positivity(str, enum.Enum):
    PROVEN = "ProvenPositive"
    SAMPLED = "SampledPositive"
    INDEFINITE = "Indefinite"


# ---------------------------------------------------------------------------
# Mellin transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MellinTransform:
    """F^(rho) through its logarithm; ``log_eval`` accepts real or complex rho (arrays too)."""

    log_eval: Callable
    provenance: Provenance
    psi: Optional[PsiSpec] = None
    strip: tuple = (-math.inf, math.inf)
    admissible: bool = True

    def log(self, rho):
        return self.log_eval(rho)

    def __call__(self, rho):
        return np.exp(self.log_eval(rho))

    @property
    def normalization(self) -> float:
        return math.exp(self.log_eval(1.0))

    def log_recursion_residual(self, rho: float) -> float:
        """|log F^(rho+1) - log F^(rho) - log psi(rho)|."""
        if self.psi is None:
            raise UnsupportedProvenance("no psi attached to this Mellin transform")
        return abs(self.log_eval(rho + 1.0) - self.log_eval(rho) - self.psi.log_psi(rho))

    def recursion_residual(self, rho: float) -> float:
        """|F^(rho+1) - psi(rho) F^(rho)| / |F^(rho+1)|."""
        if self.psi is None:
            raise UnsupportedProvenance("no psi attached to this Mellin transform")
        d = self.log_eval(rho) + self.psi.log_psi(rho) - self.log_eval(rho + 1.0)
        return abs(math.expm1(d))


def log_mellin_hat_q(lam: float, q: float, rho):
    """Particular solution log F^0(rho) = rho ln(lam) - (rho^2 - rho) ln(q) / 2."""
    return rho * math.log(lam) - 0.5 * (rho * rho - rho) * math.log(q)


def q_mellin(lam: float, q: float, exact_scale: bool = True) -> MellinTransform:
    """Mellin transform of the closed-form q-weight.

    With ``exact_scale`` the constant sqrt(-2 pi ln q) q^(-1/8) is included, so the
    result is the Mellin transform of :func:`weight_q_closed` itself.
    """
    offset = 0.5 * math.log(-2 * math.pi * math.log(q)) - math.log(q) / 8 if exact_scale else 0.0

    def log_eval(rho):
        return log_mellin_hat_q(lam, q, rho) + offset

    return MellinTransform(log_eval, Provenance.Q_CLOSED_FORM, QExp(lam, q))


def log_mellin_hat_expoly(coeffs, rho):
    """log F^(rho) = sum_n a_n / (n+1) B_{n+1}(rho); exact rational evaluation for real rho."""
    coeffs = tuple(coeffs)
    if isinstance(rho, (int, float, np.floating, np.integer)):
        return exact_poly_sum(
            [(Fraction(a) / (n + 1), n + 1) for n, a in enumerate(coeffs)], rho
        )
    total = 0.0
    for n, a in enumerate(coeffs):
        total = total + a / (n + 1) * bernoulli_poly(n + 1, rho)
    return total


def mellin_hat_expoly(coeffs, rho):
    return np.exp(log_mellin_hat_expoly(coeffs, rho))


def inverse_mellin_admissible(coeffs) -> bool:
    """True iff the Bernoulli Mellin transform decays on vertical lines (p even)."""
    spec = coeffs if isinstance(coeffs, ExpPoly) else ExpPoly(tuple(coeffs))
    return spec.p % 2 == 0


def expoly_mellin(spec) -> MellinTransform:
    if not isinstance(spec, ExpPoly):
        spec = ExpPoly(tuple(spec))
    coeffs = spec.coeffs
    return MellinTransform(
        lambda rho: log_mellin_hat_expoly(coeffs, rho),
        Provenance.BERNOULLI_MELLIN,
        spec,
        admissible=inverse_mellin_admissible(spec),
    )


# ---------------------------------------------------------------------------
# weight functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightFunction:
    """Evaluable weight F(x) = scale * func(x) on (0, inf).

    ``u_center``/``u_scale`` locate the bulk of F(x) x in u = ln x, ``u_slope`` is
    how far that bulk moves per unit increase of the moment order; they are
    hints for the quadrature bracket search only.
    """

    func: Callable = field(repr=False)
    provenance: Provenance
    positivity: Positivity
    scale: float = 1.0
    modulation: Optional[Callable] = field(default=None, repr=False)
    mellin: Optional[MellinTransform] = field(default=None, repr=False)
    u_center: float = 0.0
    u_scale: float = 1.0
    u_slope: float = 0.0
    meta: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.scale * self.func(np.asarray(x, dtype=float))

    def with_scale(self, scale: float) -> "WeightFunction":
        return WeightFunction(
            self.func, self.provenance, self.positivity, scale, self.modulation,
            self.mellin, self.u_center, self.u_scale, self.u_slope, dict(self.meta),
        )

    def normalized(self, tol: float = 1e-13) -> "WeightFunction":
        m0 = radial_moment(self, 0, tol).value
        return self.with_scale(self.scale / m0)

    def sample(self, lo: float = 1e-3, hi: float = 1e3, count: int = 129):
        """Log-spaced (x, F(x)) samples, e.g. for CSV export."""
        x = np.geomspace(lo, hi, count)
        return x, self(x)


def weight_q_closed(lam: float, q: float, x):
    """F^0(x) = exp(ln^2(x/lam) / (2 ln q) - ln(x/lam) / 2); F^0(lam) = 1."""
    if not (lam > 0 and 0 < q < 1):
        raise InvalidSpec("need lam > 0 and 0 < q < 1")
    L = np.log(np.asarray(x, dtype=float) / lam)
    out = np.exp(L * L / (2 * math.log(q)) - 0.5 * L)
    return float(out) if out.ndim == 0 else out


def check_modulation(h: Callable, q: float, lo: float = 1e-2, hi: float = 1e2):
    """Verify h(x) = h(q x) and h > 0 on 32 log-spaced points."""
    x = np.geomspace(lo, hi, PERIODICITY_POINTS)
    hx = np.asarray(h(x), dtype=float)
    hqx = np.asarray(h(q * x), dtype=float)
    if np.any(hx <= 0) or np.any(hqx <= 0):
        raise NotPositive("modulation must be strictly positive")
    err = np.max(np.abs(hx - hqx) / np.abs(hx))
    if err > PERIODICITY_RTOL:
        raise NotPeriodic(f"h(x) != h(qx): max rel err {err:.3g}")


def weight_q_modulated(lam: float, q: float, h: Callable, x):
    check_modulation(h, q)
    return weight_q_closed(lam, q, x) * h(np.asarray(x, dtype=float))


def q_normalization(lam: float, q: float) -> float:
    """M(0) of the unmodulated closed form: lam sqrt(-2 pi ln q) q^(-1/8)."""
    return lam * math.sqrt(-2 * math.pi * math.log(q)) * q ** (-0.125)


def q_weight(lam: float, q: float, h: Optional[Callable] = None, normalize: bool = True,
             tol: float = 1e-13) -> WeightFunction:
    """Closed-form q-oscillator weight, optionally modulated by a log-periodic h."""
    if h is not None:
        check_modulation(h, q)

        def func(x):
            return weight_q_closed(lam, q, x) * h(x)
    else:

        def func(x):
            return weight_q_closed(lam, q, x)

    weight = WeightFunction(
        func,
        Provenance.Q_CLOSED_FORM,
        Positivity.PROVEN,
        modulation=h,
        mellin=q_mellin(lam, q) if h is None else None,
        u_center=math.log(lam) - 0.5 * math.log(q),
        u_scale=math.sqrt(-math.log(q)),
        u_slope=-math.log(q),
        meta={"lam": lam, "q": q},
    )
    if not normalize:
        return weight
    if h is None:
        return weight.with_scale(1.0 / q_normalization(lam, q))
    return weight.normalized(tol)


# ---------------------------------------------------------------------------
# inverse Mellin transform
# ---------------------------------------------------------------------------


def _inverse_mellin_bracket(mellin: MellinTransform, c: float):
    if not mellin.admissible:
        raise NonDecayingIntegrand("Mellin transform grows on vertical lines (p odd)")

    def envelope(sigma):
        return np.exp(np.real(mellin.log(c + 1j * np.asarray(sigma))))

    try:
        return find_cutoffs(envelope, 0.0, 1.0)
    except DecayTooSlow as exc:
        raise NonDecayingIntegrand(str(exc)) from exc


def inverse_mellin_report(mellin: MellinTransform, x: float, tol: float = 1e-12, c: float = 0.5,
                          max_nodes: int = 200_000, bracket=None):
    """(1/2pi) int F^(c + i s) x^(-c - i s) ds as a complex QuadratureReport."""
    a, b = bracket if bracket is not None else _inverse_mellin_bracket(mellin, c)
    log_x = math.log(x)

    def integrand(sigma):
        rho = c + 1j * np.asarray(sigma)
        return np.exp(mellin.log(rho) - rho * log_x) / (2 * math.pi)

    # absolute floor: tol times the L1 scale of the integrand, since F(x) may be
    # far below the oscillating integrand it cancels out of
    sigma = np.linspace(a, b, 257)
    l1 = float(np.mean(np.exp(np.real(mellin.log(c + 1j * sigma))))) * (b - a) * x ** (-c)
    atol = tol * l1 / (2 * math.pi)
    report = integrate(integrand, a, b, rtol=tol, atol=atol, max_nodes=max_nodes)
    if not report.converged:
        raise QuadratureNoConvergence(
            f"inverse Mellin at x={x}: no convergence after {report.nodes_used} nodes"
        )
    return report


def inverse_mellin_numeric(mellin: MellinTransform, x: float, tol: float = 1e-12,
                           c: float = 0.5, max_nodes: int = 200_000) -> float:
    """Real part of the numeric inverse Mellin transform at x > 0."""
    return complex(inverse_mellin_report(mellin, x, tol, c, max_nodes).value).real


def inverse_mellin_weight(mellin: MellinTransform, c: float = 0.5, tol: float = 1e-12,
                          grid=(1e-3, 1e3), normalize: bool = True) -> WeightFunction:
    """Weight obtained by numerically inverting ``mellin``; positivity is sampled, never assumed."""
    bracket = _inverse_mellin_bracket(mellin, c)

    def func(x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise OutsideDomain("weight is defined for x > 0 only")
        flat = [
            complex(inverse_mellin_report(mellin, float(xi), tol, c, bracket=bracket).value).real
            for xi in x.ravel()
        ]
        return np.array(flat).reshape(x.shape)

    samples = func(np.geomspace(grid[0], grid[1], POSITIVITY_GRID))
    positivity = Positivity.SAMPLED if np.all(samples >= 0) else Positivity.INDEFINITE
    scale = math.exp(-mellin.log(1.0)) if normalize else 1.0
    # log F^ derivatives at rho = 1 locate F(x) x in u = ln x (mean, variance)
    h = 1e-3
    d1 = (mellin.log(1.0 + h) - mellin.log(1.0 - h)) / (2 * h)
    d2 = (mellin.log(1.0 + h) - 2 * mellin.log(1.0) + mellin.log(1.0 - h)) / (h * h)
    return WeightFunction(func, Provenance.NUMERIC_INVERSE_MELLIN, positivity, scale,
                          mellin=mellin, u_center=float(d1), u_scale=math.sqrt(max(d2, 1e-2)),
                          u_slope=float(d2),
                          meta={"contour": c, "u_halfwidth": NUMERIC_HALFWIDTH,
                                "rtol_floor": NUMERIC_RTOL_FLOOR,
                                "max_nodes": NUMERIC_MAX_NODES})


# ---------------------------------------------------------------------------
# functional-equation residual
# ---------------------------------------------------------------------------


def weight_feq_residual(spec: PsiSpec, F: WeightFunction, x: float, tol: float = 1e-12,
                        rhos=(-1.5, 0.25, 2.0)) -> float:
    """Residual of x F(x) = psi(-x d/dx) F(x).

    q-oscillator weights are checked pointwise as |x F(x) - lam F(q x)| on the
    unnormalised profile; everything else is checked in Mellin space as the
    largest relative recursion residual at ``rhos``.
    """
    if F.provenance is Provenance.Q_CLOSED_FORM and isinstance(spec, QExp):
        raw = F.with_scale(1.0)
        return abs(x * float(raw(x)) - spec.lam * float(raw(spec.q * x)))
    if F.mellin is None:
        raise UnsupportedProvenance(f"{F.provenance.value} weight without Mellin access")
    mellin = F.mellin
    if mellin.psi is None or mellin.psi != spec:
        mellin = MellinTransform(mellin.log_eval, mellin.provenance, spec, mellin.strip,
                                 mellin.admissible)
    return max(mellin.recursion_residual(r) for r in rhos)


# ---------------------------------------------------------------------------
# weights exp(-nu (ln x)^(2n)) and the induced psi
# ---------------------------------------------------------------------------


def weight_logpower(nu: float, n: int, x):
    lx = np.log(np.asarray(x, dtype=float))
    out = np.exp(-nu * lx ** (2 * n))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=65536)
def log_mellin_logpower(nu: float, n: int, rho: float, tol: float = 1e-14) -> float:
    """log int exp(-nu t^(2n) + rho t) dt, integrated around the peak t* = (rho / 2n nu)^(1/(2n-1))."""
    m = 2 * n
    t_star = math.copysign((abs(rho) / (m * nu)) ** (1.0 / (m - 1)), rho)
    g_star = -nu * t_star**m + rho * t_star
    curvature = m * (m - 1) * nu * abs(t_star) ** (m - 2)
    width = 1.0 / math.sqrt(curvature) if curvature > 0 else 1.0
    width = min(width, (1.0 / nu) ** (1.0 / m))
    # t = t* + s: the linear term cancels against rho s, leaving
    # -nu sum_{j>=2} C(m, j) t*^(m-j) s^j without large cancellations
    coeffs = [nu * math.comb(m, j) * t_star ** (m - j) for j in range(2, m + 1)]

    def integrand(s):
        s = np.asarray(s, dtype=float)
        acc = np.zeros_like(s)
        for c in reversed(coeffs):
            acc = (acc + c) * s
        return np.exp(-acc * s)

    report = integrate_line(integrand, center=0.0, scale=width, rtol=tol)
    if not report.converged:
        raise QuadratureNoConvergence(f"Mellin transform of the weight at rho={rho}")
    return g_star + math.log(report.value)


def log_psi_from_weight(nu: float, n: int, rho: float) -> float:
    rho = float(rho)
    return log_mellin_logpower(nu, n, rho + 1.0) - log_mellin_logpower(nu, n, rho)


def psi_from_weight(nu: float, n: int, rho: float) -> float:
    """psi(rho) = F^(rho+1) / F^(rho) for F(x) = exp(-nu (ln x)^(2n))."""
    return math.exp(log_psi_from_weight(nu, n, rho))


def logpower_mellin(nu: float, n: int) -> MellinTransform:
    from .algebra import LogPowerDerived

    def log_eval(rho):
        if np.ndim(rho) or isinstance(rho, complex):
            raise TypeError("logpower Mellin transform is evaluated on the real axis only")
        return log_mellin_logpower(nu, n, float(rho))

    return MellinTransform(log_eval, Provenance.USER_GIVEN, LogPowerDerived(nu, n))


def logpower_weight(nu: float, n: int, normalize: bool = True) -> WeightFunction:
    mellin = logpower_mellin(nu, n)
    scale = math.exp(-mellin.log(1.0)) if normalize else 1.0
    return WeightFunction(
        lambda x: weight_logpower(nu, n, x),
        Provenance.USER_GIVEN,
        Positivity.PROVEN,
        scale,
        mellin=mellin,
        u_center=(1.0 / (2 * n * nu)) ** (1.0 / (2 * n - 1)),
        u_scale=min(1.0, (1.0 / nu) ** (1.0 / (2 * n))),
        meta={"nu": nu, "n": n},
    )


def kernel_growth_witness(nu: float, n: int, x_grid, alpha: float = -2.0, tol: float = 1e-14):
    """Compare log G(x) with nu (ln x)^(2n) - alpha ln x on a grid.

    G is the kernel series of the psi induced by exp(-nu (ln x)^(2n)).
    Returns per-point rows and the minimum margin; a nonnegative minimum
    corroborates growth at least as fast as the comparison function.
    """
    from .algebra import LogPowerDerived
    from .kernel import log_kernel_G

    rep = as_representation(LogPowerDerived(nu, n))
    rows = []
    for x in x_grid:
        log_g = log_kernel_G(rep, float(x), tol)
        lx = math.log(x)
        bound = nu * lx ** (2 * n) - alpha * lx
        rows.append({"x": float(x), "log_G": log_g, "log_bound": bound, "margin": log_g - bound})
    return {
        "nu": nu,
        "n": n,
        "alpha": alpha,
        "rows": rows,
        "min_margin": min(r["margin"] for r in rows),
    }
