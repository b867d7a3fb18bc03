import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbarg.algebra import convergence_radii
from dbarg.errors import InvalidSpec
from dbarg.ring import (
    GeometricGrid,
    RingCase,
    no_weight_certificate,
    ring_feq,
    steps_to_cover,
    vanishing_propagation,
)

EXT = RingCase("exterior", 2.0)
DISK = RingCase("disk", 2.0)


def bump(lo, hi):
    """Smooth bump of height 1 with support [lo, hi]."""

    def f(x):
        x = np.asarray(x, dtype=float)
        t = (2 * x - lo - hi) / (hi - lo)
        out = np.zeros_like(t)
        inside = np.abs(t) < 1
        out[inside] = np.exp(1 - 1 / (1 - t[inside] ** 2))
        return out if out.ndim else float(out)

    return f


def test_validation():
    with pytest.raises(InvalidSpec):
        RingCase("annulus", 2.0)
    with pytest.raises(InvalidSpec):
        RingCase("disk", 0.5)


def test_radii_consistent_with_algebra():
    for case in (EXT, DISK):
        r1, r2, kind = convergence_radii(case.psi())
        assert (r1, r2) == case.radii and kind == "Ring"


def test_zero_solution():
    for x in (0.1, 0.9, 3.0):
        assert ring_feq(EXT, lambda t: 0.0, x) == 0.0
        assert ring_feq(DISK, lambda t: 0.0, x) == 0.0


def test_bump_residuals():
    F = bump(1.0, 2.0)
    assert ring_feq(EXT, F, 0.9) == pytest.approx(0.8 * F(1.8), rel=1e-15)
    assert ring_feq(EXT, F, 0.9) > 0
    G = bump(0.5, 1.0)
    assert ring_feq(DISK, G, 1.2) == pytest.approx((1 - 0.6) * G(0.6), rel=1e-15)
    assert ring_feq(DISK, G, 1.2) > 0


def test_propagation_examples():
    assert vanishing_propagation(EXT, steps=3) == (0.0, 8.0)
    assert vanishing_propagation(DISK, steps=3) == (0.125, math.inf)
    assert vanishing_propagation("exterior", 2.0, 0) == (0.0, 1.0)
    assert vanishing_propagation("disk", 2.0, 0) == (1.0, math.inf)


@settings(max_examples=50, deadline=None)
@given(q=st.floats(1.01, 10.0), k=st.integers(0, 30))
def test_propagation_monotone(q, k):
    for variant in ("exterior", "disk"):
        lo0, hi0 = vanishing_propagation(variant, q, k)
        lo1, hi1 = vanishing_propagation(variant, q, k + 1)
        assert lo1 <= lo0 and hi1 >= hi0 and (lo1, hi1) != (lo0, hi0)


def test_exhaustion():
    for X in (10.0, 1e3):
        k = steps_to_cover(EXT, X)
        assert k == math.ceil(math.log(X, 2))
        lo, hi = vanishing_propagation(EXT, steps=k)
        assert lo < X < hi
        k = steps_to_cover(DISK, 1 / X)
        lo, hi = vanishing_propagation(DISK, steps=k)
        assert lo < 1 / X < hi


def test_grid_maps_to_itself():
    grid = GeometricGrid.for_case(EXT, steps=4)
    x = grid.x
    assert np.allclose(x[grid.m:], 2.0 * x[:-grid.m], rtol=1e-14)
    # half-step offset keeps nodes off the multiplier zeros x = 1 and x = 1/q
    assert np.min(np.abs(np.log(x) / math.log(2.0) * grid.m - np.round(np.log(x) / math.log(2.0) * grid.m))) > 0.4


def test_certificate_zero_function():
    for case in (EXT, DISK):
        cert = no_weight_certificate(case, lambda x: np.zeros_like(x))
        assert cert["certificate_holds"] and cert["consistent"]
        assert cert["max_residual"] == 0.0
        assert math.isfinite(cert["C"]) and cert["C"] > 0


def test_certificate_perturbation_scale():
    # residual picks up the multiplier at the perturbed node, so the scale is linear in eps
    grid = GeometricGrid.for_case(EXT, steps=8)
    scales = []
    for eps in (1e-3, 1e-6):
        values = np.zeros_like(grid.x)
        values[len(values) // 2] = eps
        cert = no_weight_certificate(EXT, values, grid=grid)
        assert not cert["consistent"]
        assert cert["violation_scale"] >= eps
        scales.append(cert["violation_scale"] / eps)
    assert scales[0] == pytest.approx(scales[1], rel=1e-9)
    assert scales[0] <= 2.0**8


def test_certificate_flags_random_support_respecting_grid():
    grid = GeometricGrid.for_case(EXT, steps=8)
    rng = np.random.default_rng(0)
    values = rng.uniform(0.1, 1.0, size=grid.x.shape)
    values[grid.x <= 1.0] = 0.0
    cert = no_weight_certificate(EXT, values, grid=grid)
    assert cert["support_violation"] == 0.0
    assert not cert["consistent"] and not cert["certificate_holds"]


def test_certificate_bound_holds_for_near_solutions():
    # an exact-to-tol perturbation propagated through the recursion stays within C * tol
    tol = 1e-10
    grid = GeometricGrid.for_case(EXT, steps=6)
    x, m = grid.x, grid.m
    values = np.zeros_like(x)
    rng = np.random.default_rng(1)
    for i in range(m, len(x)):
        if x[i] > 1.0:
            # (x_i - 1) F_i = F_{i-m} + r with |r| <= tol
            values[i] = (values[i - m] + rng.uniform(-tol, tol)) / (x[i] - 1.0)
    cert = no_weight_certificate(EXT, values, tol=tol, grid=grid)
    assert cert["consistent"]
    assert cert["certificate_holds"]
