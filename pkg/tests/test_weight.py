import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbarg.algebra import ExpPoly, LogPowerDerived, QExp
from dbarg.errors import NonDecayingIntegrand, NotPeriodic, NotPositive, UnsupportedProvenance
from dbarg.quadrature import radial_moment
from dbarg.weight import (
    Positivity,
    Provenance,
    WeightFunction,
    check_modulation,
    expoly_mellin,
    inverse_mellin_admissible,
    inverse_mellin_report,
    inverse_mellin_numeric,
    inverse_mellin_weight,
    kernel_growth_witness,
    log_mellin_hat_expoly,
    log_mellin_hat_q,
    log_psi_from_weight,
    logpower_mellin,
    logpower_weight,
    mellin_hat_expoly,
    psi_from_weight,
    q_mellin,
    q_weight,
    weight_feq_residual,
    weight_logpower,
    weight_q_closed,
    weight_q_modulated,
)

LN_Q = math.log(0.5)


def h_good(x):
    return 2.0 + np.cos(2 * math.pi * np.log(x) / LN_Q)


def h_half(x):
    return 2.0 + np.cos(math.pi * np.log(x) / LN_Q)


# --- q-oscillator closed form ------------------------------------------------


def test_closed_form_examples():
    assert weight_q_closed(1.0, 0.5, 1.0) == 1.0
    x = 2.5
    assert x * weight_q_closed(1.0, 0.5, x) == pytest.approx(weight_q_closed(1.0, 0.5, 0.5 * x), abs=1e-14)
    # mpmath value of F0(2.5)
    assert weight_q_closed(1.0, 0.5, 2.5) == pytest.approx(0.345148473446654714, rel=1e-14)


def test_moment_ratio_by_quadrature():
    F = q_weight(1.0, 0.5)
    assert radial_moment(F, 0).value == pytest.approx(1.0, rel=1e-12)
    assert radial_moment(F, 1).value == pytest.approx(2.0, rel=1e-8)


def test_fast_decay_envelope():
    lam, q = 1.0, 0.5
    c = -1 / (2 * math.log(q))
    x = np.geomspace(1e-8, 1e8, 200)
    L = np.log(x)
    assert np.all(weight_q_closed(lam, q, x) <= np.exp(-c * L**2 + 0.5 * np.abs(L)) * (1 + 1e-12))


def test_modulation_examples():
    x = np.geomspace(0.01, 100, 7)
    assert np.allclose(weight_q_modulated(1.0, 0.5, lambda t: np.ones_like(t), x), weight_q_closed(1.0, 0.5, x))
    F = q_weight(1.0, 0.5, h=h_good, normalize=False)
    ratio = radial_moment(F, 1).value / radial_moment(F, 0).value
    assert ratio == pytest.approx(2.0, rel=1e-8)
    with pytest.raises(NotPeriodic):
        check_modulation(h_half, 0.5)
    with pytest.raises(NotPositive):
        check_modulation(lambda t: np.cos(2 * math.pi * np.log(t) / LN_Q), 0.5)


def test_normalized_weights_have_unit_mass():
    for F in (q_weight(2.0, 0.3), q_weight(1.0, 0.5, h=h_good), logpower_weight(1.0, 2)):
        assert radial_moment(F, 0).value == pytest.approx(1.0, rel=1e-10)


# --- Bernoulli Mellin transforms ---------------------------------------------


def test_p0_matches_q_particular_solution_after_normalisation():
    lam, q = 1.7, 0.4
    coeffs = (math.log(lam), -math.log(q))
    for rho in (-2.0, -0.3, 0.5, 1.0, 2.7):
        a = log_mellin_hat_expoly(coeffs, rho) - log_mellin_hat_expoly(coeffs, 1.0)
        b = log_mellin_hat_q(lam, q, rho) - log_mellin_hat_q(lam, q, 1.0)
        assert a == pytest.approx(b, abs=1e-13)


def test_p0_constant_offset():
    # the two particular solutions differ by -ln(lam)/2 - ln(q)/12
    lam, q = 1.7, 0.4
    coeffs = (math.log(lam), -math.log(q))
    diff = log_mellin_hat_expoly(coeffs, 0.3) - log_mellin_hat_q(lam, q, 0.3)
    assert diff == pytest.approx(-math.log(lam) / 2 - math.log(q) / 12, abs=1e-14)


def test_degree5_recursion_and_ratio():
    spec = ExpPoly((0, 0, 0, 0, 0, 1))
    m = expoly_mellin(spec)
    assert abs(m.log(1.3) - m.log(0.3) - 0.3**5) <= 1e-12
    a0 = 0.37
    coeffs = (a0, 0.2, -0.1, 1.0)
    assert mellin_hat_expoly(coeffs, 1.0) / mellin_hat_expoly(coeffs, 0.0) == pytest.approx(math.exp(a0), rel=1e-14)


def test_admissibility_gate():
    assert inverse_mellin_admissible((0.0, 1.0))
    assert not inverse_mellin_admissible((0.0, 0.0, 0.0, 1.0))
    assert inverse_mellin_admissible((0.0, 0.0, 0.0, 0.0, 0.0, 1.0))


def test_non_admissible_inversion_refused():
    m = expoly_mellin(ExpPoly((0.0, 0.0, 0.0, 1.0)))
    with pytest.raises(NonDecayingIntegrand):
        inverse_mellin_numeric(m, 1.0)


@pytest.mark.parametrize("mellin", [
    q_mellin(1.0, 0.5),
    q_mellin(2.0, 0.9),
    expoly_mellin(ExpPoly((0.3, 1.0))),
    expoly_mellin(ExpPoly((0.1, -0.2, 0.3, 0.1, 0.05, 1.0))),
    logpower_mellin(0.5, 1),
    logpower_mellin(1.0, 2),
], ids=["q", "q2", "deg1", "deg5", "logpow1", "logpow2"])
def test_mellin_recursion_invariant(mellin):
    rhos = np.linspace(-4, 4, 64)
    worst = max(mellin.log_recursion_residual(float(r)) for r in rhos)
    assert worst <= 1e-10


# --- inverse Mellin -----------------------------------------------------------


def test_inverse_recovers_closed_form():
    m = q_mellin(1.0, 0.5)
    assert inverse_mellin_numeric(m, 1.0) == pytest.approx(1.0, rel=1e-8)
    for x in (0.1, 0.6, 3.0):
        assert inverse_mellin_numeric(m, x) == pytest.approx(weight_q_closed(1.0, 0.5, x), rel=1e-8)


def test_inverse_is_real():
    for m in (q_mellin(1.0, 0.5), expoly_mellin(ExpPoly((0, 0, 0, 0, 0, 1)))):
        for x in (0.05, 1.0, 7.0):
            v = complex(inverse_mellin_report(m, x).value)
            assert abs(v.imag) <= 1e-10 * max(abs(v.real), 1e-3)


# mpmath (30 digits) values of (1/2pi) int exp(B6(c+is)/6) x^(-c-is) ds, c = 1/2
F5_AT = {1.0: 0.341024942495022592, 0.0158489319246111: -0.315089018844574731,
         10.0: 0.0212673183774605096}


def test_degree5_weight_values_and_symmetry():
    m = expoly_mellin(ExpPoly((0, 0, 0, 0, 0, 1)))
    for x, expected in F5_AT.items():
        assert inverse_mellin_numeric(m, x) == pytest.approx(expected, rel=1e-9)
    # B6 symmetric about 1/2 makes sqrt(x) F(x) even in ln x
    for x in (0.3, 2.0, 9.0):
        a = math.sqrt(x) * inverse_mellin_numeric(m, x)
        b = math.sqrt(1 / x) * inverse_mellin_numeric(m, 1 / x)
        assert a == pytest.approx(b, rel=1e-9, abs=1e-13)


def test_sampled_positivity_reported():
    deg1 = inverse_mellin_weight(expoly_mellin(ExpPoly((0.0, 1.0))))
    assert deg1.positivity is Positivity.SAMPLED
    assert deg1.provenance is Provenance.NUMERIC_INVERSE_MELLIN
    deg5 = inverse_mellin_weight(expoly_mellin(ExpPoly((0, 0, 0, 0, 0, 1))))
    assert deg5.positivity is Positivity.INDEFINITE


def test_contour_independence():
    m = q_mellin(1.0, 0.5)
    for x in (0.2, 1.0, 5.0):
        assert inverse_mellin_numeric(m, x, c=1.5) == pytest.approx(inverse_mellin_numeric(m, x, c=0.5), rel=1e-8)


# --- functional-equation residual ---------------------------------------------


def test_feq_residual_examples():
    spec = QExp(1.0, 0.5)
    assert weight_feq_residual(spec, q_weight(1.0, 0.5), 0.3) <= 1e-14
    assert weight_feq_residual(spec, q_weight(1.0, 0.5, h=h_good), 0.3) <= 1e-14
    deg5 = ExpPoly((0, 0, 0, 0, 0, 1))
    F5 = WeightFunction(lambda x: x, Provenance.BERNOULLI_MELLIN, Positivity.INDEFINITE,
                        mellin=expoly_mellin(deg5))
    assert weight_feq_residual(deg5, F5, 1.0) <= 1e-10
    bare = WeightFunction(lambda x: np.exp(-np.log(x) ** 2), Provenance.USER_GIVEN, Positivity.PROVEN)
    with pytest.raises(UnsupportedProvenance):
        weight_feq_residual(spec, bare, 1.0)


def test_feq_residual_detects_mismatch():
    assert weight_feq_residual(QExp(1.0, 0.6), q_weight(1.0, 0.5), 1.7) > 1e-3


# --- weight to algebra ----------------------------------------------------------


def test_logpower_weight_closed_form():
    assert weight_logpower(0.5, 1, 1.0) == 1.0
    assert weight_logpower(2.0, 2, math.e) == pytest.approx(math.exp(-2.0), rel=1e-15)


def test_psi_from_weight_examples():
    assert psi_from_weight(0.5, 1, 1.2) == pytest.approx(math.exp((2 * 1.2 + 1) / 2.0), rel=1e-8)
    x = 2.3
    assert psi_from_weight(1.0, 2, -x) * psi_from_weight(1.0, 2, x - 1) == pytest.approx(1.0, rel=1e-8)
    assert log_psi_from_weight(1.0, 2, 1e4) * (4 / 1e4) ** (1 / 3) == pytest.approx(1.0, rel=0.1)


# mpmath quad of int exp(-t^4 + rho t) dt, ratio at rho + 1 and rho
PSI_LOGPOWER_2 = {2.3: 2.07682193163243649, -2.3: 0.586894895408098351,
                  1.3: 1.70388259946382447, 0.5: 1.37806227998906760}


def test_psi_from_weight_frozen_oracle():
    for rho, expected in PSI_LOGPOWER_2.items():
        assert psi_from_weight(1.0, 2, rho) == pytest.approx(expected, rel=1e-10)


def test_logpower_mellin_even():
    m = logpower_mellin(0.7, 2)
    for rho in (0.3, 1.1, 2.5):
        assert m.log(rho) == pytest.approx(m.log(-rho), abs=1e-12)


def test_logpower_derived_psi_matches_family():
    spec = LogPowerDerived(0.5, 1)
    assert spec(1.2) == pytest.approx(math.exp(1.7), rel=1e-8)
    assert spec(50.0) > spec(10.0) > 1


@settings(max_examples=20, deadline=None)
@given(nu=st.floats(0.2, 3.0), x=st.floats(-3.0, 3.0))
def test_psi_symmetry_property(nu, x):
    for n in (1, 2):
        total = log_psi_from_weight(nu, n, -x) + log_psi_from_weight(nu, n, x - 1)
        assert abs(total) <= 1e-9


# --- kernel growth --------------------------------------------------------------


def test_growth_witness_plumbing():
    grid = np.geomspace(10, 1e3, 9)
    report = kernel_growth_witness(0.5, 1, grid)
    assert [r["x"] for r in report["rows"]] == pytest.approx(list(grid))
    assert report["alpha"] == -2.0
    at_one = kernel_growth_witness(0.5, 1, [1.0])["rows"][0]
    assert at_one["log_bound"] == 0.0
    assert math.isfinite(at_one["log_G"])


def test_growth_witness_matches_derived_slope():
    # n = 1 is a q-oscillator, so log G = nu ln^2 x - ln x + bounded periodic part.
    # Against the alpha = -2 comparison the margin therefore falls with slope -3.
    grid = np.geomspace(10, 1e3, 9)
    report = kernel_growth_witness(0.5, 1, grid)
    margins = np.array([r["margin"] for r in report["rows"]])
    slope = np.polyfit(np.log(grid), margins, 1)[0]
    assert slope == pytest.approx(-3.0, abs=1e-6)
    assert report["min_margin"] < 0
    tight = kernel_growth_witness(0.5, 1, grid, alpha=1.0)
    spread = [r["margin"] for r in tight["rows"]]
    assert max(spread) - min(spread) < 1e-6
    assert tight["min_margin"] > 0
