"""Adaptive Gauss-Kronrod integration on the real line and the weighted-integral checks.

Radial integrals over (0, inf) are taken in u = ln x.  The complex-plane
measure is normalised as dz dzbar = dA / pi, so that with z = sqrt(x) e^{i theta}

    int F(z zbar) g(z) dz dzbar = int_0^inf dx int_0^{2 pi} dtheta / (2 pi) F(x) g(z),

and the diagonal reduction of int F(z zbar) |z|^{2n} dz dzbar is exactly the
radial moment int_0^inf F(x) x^n dx.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .algebra import (
    as_coeff_dict,
    as_representation,
    factorial_table,
    series_window,
)
from .errors import DecayTooSlow, QuadratureNoConvergence

MAX_NODES = 200_000
ANGULAR_NODES = 256
TAIL_CUTOFF = 1e-18

# 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:7:2] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[9:15:2] = _WG[2::-1]


@dataclass
class QuadratureReport:
    value: complex
    abs_err_estimate: float
    rel_err_estimate: float
    nodes_used: int
    converged: bool
    reference: Optional[complex] = None
    mismatch: Optional[float] = None

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("value", "reference"):
            v = out[key]
            if isinstance(v, complex):
                out[key] = v.real if v.imag == 0 else {"re": v.real, "im": v.imag}
        return out


@dataclass(frozen=True)
class MeasureConvention:
    """Constant relating dz dzbar to the Euclidean area element dA."""

    factor: float = 1.0 / math.pi

    def radial_angular_jacobian(self) -> float:
        # dA = r dr dtheta = dx dtheta / 2, so factor * dA = factor * pi * dx * dtheta / (2 pi)
        return self.factor * math.pi


MEASURE = MeasureConvention()


def _fsum(values) -> complex:
    values = list(values)
    re = math.fsum(v.real for v in values)
    im = math.fsum(getattr(v, "imag", 0.0) for v in values)
    return complex(re, im)


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.asarray(f(mid + half * _NODES))
    k = half * np.dot(_KRONROD, fx)
    g = half * np.dot(_GAUSS, fx)
    return complex(k), float(abs(k - g))


def integrate(
    f: Callable,
    a: float,
    b: float,
    *,
    rtol: float = 1e-12,
    atol: float = 0.0,
    max_nodes: int = MAX_NODES,
    initial_intervals: int = 8,
) -> QuadratureReport:
    """Globally adaptive G7/K15 quadrature of a vectorised integrand over [a, b].

    The interval with the largest error estimate is bisected until the summed
    estimate falls below max(atol, rtol |I|) or the node budget is spent.
    Ties are broken by creation order, so results are deterministic.
    """
    edges = np.linspace(a, b, initial_intervals + 1)
    heap = []
    counter = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _gk15(f, lo, hi)
        heap.append((-err, counter, lo, hi, val))
        counter += 1
    heapq.heapify(heap)
    nodes = 15 * initial_intervals

    def totals():
        value = _fsum(item[4] for item in heap)
        error = math.fsum(-item[0] for item in heap)
        return value, error

    value, error = totals()
    while nodes <= max_nodes and error > max(atol, rtol * abs(value)):
        if nodes + 30 > max_nodes:
            break
        neg_err, _, lo, hi, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        for sub in ((lo, mid), (mid, hi)):
            val, err = _gk15(f, *sub)
            heapq.heappush(heap, (-err, counter, sub[0], sub[1], val))
            counter += 1
        nodes += 30
        value, error = totals()
    converged = nodes <= max_nodes and error <= max(atol, rtol * abs(value))
    rel = error / abs(value) if value != 0 else (0.0 if error == 0 else math.inf)
    if value.imag == 0:
        value = value.real
    return QuadratureReport(value, error, rel, nodes, converged)


def find_cutoffs(
    envelope: Callable[[float], float],
    center: float = 0.0,
    scale: float = 1.0,
    cutoff: float = TAIL_CUTOFF,
    max_doublings: int = 60,
):
    """Bracket [a, b] around ``center`` outside of which envelope < cutoff * peak.

    Steps outward geometrically, then re-samples the bracket to make sure the
    peak was not skipped over; raises :class:`DecayTooSlow` if no bracket is found.
    """

    def at(u):
        return float(np.abs(np.asarray(envelope(u), dtype=complex)).max())

    def on_grid(grid):
        try:
            vals = np.abs(np.asarray(envelope(grid), dtype=complex))
            if vals.shape == grid.shape:
                return vals
        except (TypeError, ValueError):
            pass
        return np.array([at(u) for u in grid])

    peak = at(center)
    for _ in range(4):
        ends = []
        for direction in (1.0, -1.0):
            prev = peak
            for k in range(max_doublings):
                u = center + direction * scale * 2.0**k
                val = at(u)
                if not math.isfinite(val):
                    raise DecayTooSlow(f"integrand not finite at u = {u}")
                peak = max(peak, val)
                if val < cutoff * peak and val <= prev:
                    ends.append(u)
                    break
                prev = val
            else:
                raise DecayTooSlow("integrand does not decay below cutoff")
        b, a = ends
        grid = np.linspace(a, b, 257)
        samples = on_grid(grid)
        if not np.all(np.isfinite(samples)):
            raise DecayTooSlow("integrand not finite inside the bracket")
        top = float(samples.max())
        if samples[0] < cutoff * top and samples[-1] < cutoff * top:
            return a, b
        center, peak = float(grid[int(samples.argmax())]), top
    raise DecayTooSlow("tails above cutoff at the bracket ends")


def integrate_line(
    f: Callable,
    *,
    center: float = 0.0,
    scale: float = 1.0,
    envelope: Optional[Callable[[float], float]] = None,
    rtol: float = 1e-12,
    atol: float = 0.0,
    max_nodes: int = MAX_NODES,
    cutoff: float = TAIL_CUTOFF,
) -> QuadratureReport:
    """Integrate a decaying integrand over the whole real line."""
    if envelope is None:

        def envelope(u):
            return f(np.atleast_1d(np.asarray(u, dtype=float)))

    a, b = find_cutoffs(envelope, center, scale, cutoff)
    return integrate(f, a, b, rtol=rtol, atol=atol, max_nodes=max_nodes)


def _require(report: QuadratureReport, what: str) -> QuadratureReport:
    if not report.converged:
        raise QuadratureNoConvergence(
            f"{what}: no convergence after {report.nodes_used} nodes "
            f"(rel err estimate {report.rel_err_estimate:.3g})"
        )
    return report


def gaussian_selftest(b: float, rtol: float = 1e-13) -> float:
    """Relative error of the engine on int exp(-u^2/2 + b u) du = sqrt(2 pi) exp(b^2/2)."""
    report = integrate_line(lambda u: np.exp(-0.5 * u * u + b * u), center=b, rtol=rtol)
    exact = math.sqrt(2 * math.pi) * math.exp(0.5 * b * b)
    return abs(report.value - exact) / exact


# ---------------------------------------------------------------------------
# radial moments
# ---------------------------------------------------------------------------


def _radial_integrand(F, power):
    def integrand(u):
        u = np.asarray(u, dtype=float)
        return F(np.exp(u)) * np.exp((power + 1.0) * u)

    return integrand


def radial_moment(F, n: float, tol: float = 1e-12, max_nodes: int = MAX_NODES) -> QuadratureReport:
    """int_0^inf F(x) x^n dx, integrated in u = ln x."""
    integrand = _radial_integrand(F, n)
    center = F.u_center + n * F.u_slope
    halfwidth = F.meta.get("u_halfwidth")
    if halfwidth is not None:
        # tails below the weight's own noise floor cannot be bracketed by decay
        span = halfwidth * F.u_scale
        rtol = max(tol, F.meta.get("rtol_floor", 0.0))
        cap = min(max_nodes, F.meta.get("max_nodes", max_nodes))
        report = integrate(integrand, center - span, center + span, rtol=rtol, max_nodes=cap)
    else:
        report = integrate_line(integrand, center=center, scale=F.u_scale, rtol=tol,
                                max_nodes=max_nodes)
    return _require(report, f"radial moment n={n}")


def moment_recursion_check(F, spec, nmin: int, nmax: int, tol: float = 1e-12,
                           max_nodes: int = MAX_NODES) -> float:
    """max_n |M(n+1) - psi(n+1) M(n)| / M(n+1) over n in [nmin, nmax], moments by quadrature."""
    rep = as_representation(spec)
    moments = {n: radial_moment(F, n, tol, max_nodes).value for n in range(nmin, nmax + 2)}
    worst = 0.0
    for n in range(nmin, nmax + 1):
        psi_next = math.exp(rep.log_psi(n + 1))
        worst = max(worst, abs(moments[n + 1] - psi_next * moments[n]) / abs(moments[n + 1]))
    return worst


# ---------------------------------------------------------------------------
# complex-plane checks
# ---------------------------------------------------------------------------


def _angles(count=ANGULAR_NODES):
    return 2 * math.pi * np.arange(count) / count


def _angular_mean(k: int, count=ANGULAR_NODES) -> complex:
    """(1/2pi) int e^{i k theta} dtheta by the trapezoidal rule on ``count`` nodes."""
    return complex(np.mean(np.exp(1j * k * _angles(count))))


def parseval_check(F, rep, coeffs, tol: float = 1e-12, mode: str = "analytic",
                   max_nodes: int = MAX_NODES) -> QuadratureReport:
    """Weighted-integral norm int F |f|^2 dz dzbar against the coefficient norm sum |f_n|^2.

    ``mode="analytic"`` integrates the angle exactly (off-diagonal terms vanish),
    leaving sum |f_n|^2 R(n) / M(n) with radial moments R(n) by quadrature.
    ``mode="2d"`` integrates |f(z)|^2 on a radial x angular tensor grid.
    """
    rep = as_representation(rep)
    coeffs = as_coeff_dict(coeffs)
    keys = sorted(coeffs)
    table = factorial_table(rep, min(keys[0], 0), max(keys[-1], 0))
    reference = math.fsum(abs(c) ** 2 for c in coeffs.values())

    if mode == "analytic":
        parts, errs, nodes = [], [], 0
        for n in keys:
            r = radial_moment(F, n, tol, max_nodes)
            w = abs(coeffs[n]) ** 2 * math.exp(-table.log_moment(n))
            parts.append(w * r.value)
            errs.append(w * r.abs_err_estimate)
            nodes += r.nodes_used
        value = math.fsum(parts)
        err = math.fsum(errs)
        report = QuadratureReport(value, err, err / abs(value), nodes, True)
    elif mode == "2d":
        theta = _angles()
        phases = np.exp(1j * theta)
        ns = np.array(keys)
        amps = np.array([coeffs[n] * math.exp(-0.5 * table.log_moment(n)) for n in keys])

        def integrand(u):
            u = np.asarray(u, dtype=float)
            r = np.exp(0.5 * u)
            z = r[:, None] * phases[None, :]
            f = np.tensordot(z[..., None] ** ns, amps, axes=([2], [0]))
            ang = np.mean(np.abs(f) ** 2, axis=1)
            return MEASURE.radial_angular_jacobian() * F(np.exp(u)) * np.exp(u) * ang

        lo, hi = keys[0], keys[-1]
        center = F.u_center + 0.5 * (lo + hi) * F.u_slope
        report = _require(
            integrate_line(
                integrand,
                center=center,
                scale=F.u_scale,
                rtol=tol,
                max_nodes=max_nodes,
            ),
            "parseval 2d",
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    report.reference = reference
    report.mismatch = abs(report.value - reference) / reference
    return report


def adjointness_residual(F, rep, m: int, n: int, tol: float = 1e-12,
                         max_nodes: int = MAX_NODES) -> float:
    """|<e_m, a† e_n> - <a e_m, e_n>| in the weighted inner product <g|f> = int F conj(g) f.

    With e_n(z) = z^n / M(n)^(1/2), a† = z and a = z^{-1} psi(z d/dz), both sides
    factor into an angular mean of e^{i(n+1-m) theta} and a radial moment.
    """
    rep = as_representation(rep)
    table = factorial_table(rep, min(m, n, 0), max(m, n, 0))
    norm = math.exp(-0.5 * (table.log_moment(m) + table.log_moment(n)))
    ang = _angular_mean(n + 1 - m)
    lhs = ang * radial_moment(F, 0.5 * (m + n + 1), tol, max_nodes).value * norm
    psi_m = math.exp(rep.log_psi(m))
    rhs = ang * psi_m * radial_moment(F, 0.5 * (m + n - 1), tol, max_nodes).value * norm
    return abs(lhs - rhs)


def adjointness_sides(F, rep, m: int, n: int, tol: float = 1e-12):
    """Both sides of the adjointness relation for the diagonal case m = n + 1."""
    rep = as_representation(rep)
    table = factorial_table(rep, min(m, n, 0), max(m, n, 0))
    norm = math.exp(-0.5 * (table.log_moment(m) + table.log_moment(n)))
    lhs = radial_moment(F, 0.5 * (m + n + 1), tol).value * norm
    rhs = math.exp(rep.log_psi(m)) * radial_moment(F, 0.5 * (m + n - 1), tol).value * norm
    return lhs * _angular_mean(n + 1 - m), rhs * _angular_mean(n + 1 - m)


def _kernel_on_grid(rep, w, tol):
    """G(w) = sum_n w^n / M(n) for an array of complex w, truncated for the extreme moduli."""
    mod = np.abs(w)
    hi = series_window(rep, float(mod.max()), tol)
    lo = series_window(rep, float(mod.min()), tol)
    table = factorial_table(rep, lo.nmin, hi.nmax)
    log_w = np.log(w)
    out = np.zeros(w.shape, dtype=complex)
    for n in range(lo.nmin, hi.nmax + 1):
        out += np.exp(n * log_w - table.log_moment(n))
    return out


def reproducing_check(F, rep, zeta: complex, coeffs, tol: float = 1e-12, mode: str = "analytic",
                      max_nodes: int = MAX_NODES) -> float:
    """|f(zeta) - int F(z zbar) G(zeta zbar) f(z) dz dzbar| for finitely supported f."""
    rep = as_representation(rep)
    coeffs = as_coeff_dict(coeffs)
    zeta = complex(zeta)
    keys = sorted(coeffs)
    table = factorial_table(rep, min(keys[0], 0), max(keys[-1], 0))
    amps = {n: coeffs[n] * math.exp(-0.5 * table.log_moment(n)) for n in keys}
    target = _fsum(amps[n] * zeta**n for n in keys)

    if mode == "analytic":
        parts = []
        for n in keys:
            r = radial_moment(F, n, tol, max_nodes).value
            parts.append(amps[n] * zeta**n * r * math.exp(-table.log_moment(n)))
        integral = _fsum(parts)
    elif mode == "2d":
        theta = _angles()
        phases = np.exp(1j * theta)
        ns = np.array(keys)
        amp = np.array([amps[n] for n in keys])

        def integrand(u):
            u = np.asarray(u, dtype=float)
            r = np.exp(0.5 * u)
            z = r[:, None] * phases[None, :]
            f = np.tensordot(z[..., None] ** ns, amp, axes=([2], [0]))
            g = _kernel_on_grid(rep, zeta * np.conj(z), 1e-16)
            ang = np.mean(g * f, axis=1)
            return MEASURE.radial_angular_jacobian() * F(np.exp(u)) * np.exp(u) * ang

        def envelope(u):
            x = math.exp(u)
            w = np.array([abs(zeta) * math.sqrt(x)], dtype=complex)
            g = abs(_kernel_on_grid(rep, w, 1e-12)[0])
            fmax = sum(abs(amps[n]) * x ** (0.5 * n) for n in keys)
            return float(F(np.array([x]))[0]) * x * g * fmax

        center = F.u_center + 0.5 * (keys[0] + keys[-1]) * F.u_slope
        integral = _require(
            integrate_line(integrand, center=center, scale=F.u_scale, envelope=envelope,
                           rtol=tol, max_nodes=max_nodes),
            "reproducing 2d",
        ).value
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return abs(target - complex(integral))
