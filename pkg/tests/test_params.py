"""Tests for parameter validation, the phase primitive, and Gaussian tails.

Oracles used here (independent from the implementation routes):
  * the phase integral has the closed form sqrt(pi/alpha)*erfi(sqrt(alpha)*x/2),
    evaluated via scipy.special.erfi and, for one pinned literal, via the
    Maclaurin series of the error-function integral;
  * Gaussian tail integrals equal gamma^{-(n+1)/2} * Gamma((n+1)/2, gamma*x^2) / 2,
    evaluated with mpmath's incomplete gamma at 50 digits.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from llgshrink.errors import ParameterError
from llgshrink.params import (
    X_CAP,
    Params,
    gauss_tail,
    make_params,
    phase_value,
    phi,
    phi_asymptotic,
    tail_bound,
    truncation_point,
)


def phi_oracle(alpha: float, x: float) -> float:
    """Closed form sqrt(pi/alpha) * erfi(sqrt(alpha) * x / 2)."""
    return math.sqrt(math.pi / alpha) * float(special.erfi(math.sqrt(alpha) * x / 2.0))


def gauss_tail_oracle(gamma: float, n: int, x: float) -> float:
    """Tail integral via the upper incomplete gamma function at 50 digits.

    Substituting t = gamma*s^2 gives int_x^inf s^n e^{-gamma s^2} ds
    = Gamma((n+1)/2, gamma x^2) / (2 gamma^{(n+1)/2}) for x >= 0.  For x < 0
    the odd-n case is unchanged (the symmetric piece cancels) and the even-n
    case is the whole-line integral minus the mirrored tail.
    """
    with mpmath.workdps(50):
        g = mpmath.mpf(gamma)
        a = mpmath.mpf(n + 1) / 2
        z = g * mpmath.mpf(x) ** 2
        val = mpmath.gammainc(a, z) / (2 * g**a)
        if x < 0 and n % 2 == 0:
            val = mpmath.gamma(a) / g**a - val
        return float(val)


# ---------------------------------------------------------------------------
# make_params


def test_make_params_alpha_one_has_zero_beta():
    p = make_params(0.5, 1.0)
    assert p.beta == 0.0


def test_make_params_beta_arithmetic():
    p = make_params(0.5, 0.5)
    assert p.beta == pytest.approx(math.sqrt(0.75), abs=1e-15)
    assert abs(p.alpha**2 + p.beta**2 - 1.0) < 1e-15


def test_make_params_is_frozen_record():
    p = make_params(2.0, 0.25)
    assert isinstance(p, Params)
    with pytest.raises(Exception):
        p.c = 3.0  # type: ignore[misc]


@pytest.mark.parametrize(
    "c, alpha",
    [
        (0.5, 0.0),  # undamped case out of scope
        (0.5, -0.1),
        (0.5, 1.1),
        (0.0, 0.5),
        (-1.0, 0.5),
        (math.nan, 0.5),
        (0.5, math.nan),
        (math.inf, 0.5),
    ],
)
def test_make_params_rejects_bad_domain(c, alpha):
    with pytest.raises(ParameterError):
        make_params(c, alpha)


@given(
    c=st.floats(min_value=1e-6, max_value=1e3),
    alpha=st.floats(min_value=1e-6, max_value=1.0),
)
@settings(max_examples=200, derandomize=True)
def test_make_params_pythagorean_identity(c, alpha):
    p = make_params(c, alpha)
    assert abs(p.alpha**2 + p.beta**2 - 1.0) <= 1e-15
    assert 0.0 <= p.beta < 1.0 or (alpha == 1.0 and p.beta == 0.0)


# ---------------------------------------------------------------------------
# phi


def test_phi_at_zero_is_zero():
    assert phi(0.5, 0.0) == 0.0


def test_phi_alpha1_x2_matches_series_literal():
    # Maclaurin oracle: phi(1,2) = 2 * sum_{n>=0} 1/(n! (2n+1)); 20 terms
    series = 2.0 * sum(1.0 / (math.factorial(n) * (2 * n + 1)) for n in range(20))
    assert phi(1.0, 2.0) == pytest.approx(series, rel=1e-12)
    assert phi(1.0, 2.0) == pytest.approx(2.9253, abs=5e-5)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 1.0])
@pytest.mark.parametrize("x", [0.25, 1.0, 3.0, 7.5, 12.0])
def test_phi_matches_closed_form(alpha, x):
    assert phi(alpha, x) == pytest.approx(phi_oracle(alpha, x), rel=1e-12)


@given(x=st.floats(min_value=-10.0, max_value=10.0))
@settings(max_examples=100, derandomize=True)
def test_phi_is_odd(x):
    assert phi(0.7, x) + phi(0.7, -x) == pytest.approx(0.0, abs=1e-12 * (1 + abs(phi(0.7, x))))


def test_phi_strictly_increasing():
    xs = np.linspace(-11.0, 11.0, 113)
    vals = [phi(0.4, float(x)) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_phi_overflow_guard_returns_inf_not_exception():
    # far beyond the cap the integrand overflows double precision
    assert phi(1.0, 60.0) == math.inf
    assert phi(1.0, -60.0) == -math.inf


def test_phi_rejects_bad_alpha():
    with pytest.raises(ParameterError):
        phi(0.0, 1.0)
    with pytest.raises(ParameterError):
        phi(1.5, 1.0)


def test_phase_value_reduces_into_two_pi():
    p = make_params(0.5, 0.5)
    pv = phase_value(p, 3.0)
    assert 0.0 <= pv.psi < 2.0 * math.pi
    assert pv.phi == pytest.approx(phi_oracle(0.5, 3.0), rel=1e-12)
    expected = math.fmod(0.5 * pv.phi, 2.0 * math.pi)
    assert pv.psi == pytest.approx(expected, abs=1e-10)


# ---------------------------------------------------------------------------
# phi_asymptotic


@pytest.mark.parametrize("alpha,x,rtol", [(1.0, 8.0, 1e-3), (0.5, 10.0, 2e-3)])
def test_phi_asymptotic_agrees_with_quadrature(alpha, x, rtol):
    # At (0.5, 10) the first omitted term is 120/(alpha x^2)^3 = 9.6e-4 and the
    # full remainder is ~1.37e-3, so 2e-3 is the honest threshold there.
    assert phi_asymptotic(alpha, x) == pytest.approx(phi(alpha, x), rel=rtol)


def test_phi_asymptotic_rejects_below_regime():
    with pytest.raises(ParameterError):
        phi_asymptotic(1.0, 1.0)
    with pytest.raises(ParameterError):
        phi_asymptotic(0.25, 5.9)  # threshold is 3/sqrt(alpha) = 6


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0])
def test_phi_asymptotic_relative_error_envelope(alpha):
    # The next omitted series term is 120/(alpha*x^2)^3 = 1.2e-4 at x = 10/sqrt(alpha),
    # so 1e-4 is not attainable exactly at that abscissa; it is attained by 12/sqrt(alpha).
    x10 = 10.0 / math.sqrt(alpha)
    rel10 = abs(phi_asymptotic(alpha, x10) / phi(alpha, x10) - 1.0)
    assert rel10 < 2e-4
    x12 = 12.0 / math.sqrt(alpha)
    rel12 = abs(phi_asymptotic(alpha, x12) / phi(alpha, x12) - 1.0)
    assert rel12 < 1e-4


# ---------------------------------------------------------------------------
# gauss_tail


def test_gauss_tail_linear_weight_at_zero():
    assert gauss_tail(1.0, 1, 0.0) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("gamma,x", [(0.25, 0.0), (0.25, 2.0), (1.0, 5.0), (0.07, 9.0)])
def test_gauss_tail_n1_closed_form(gamma, x):
    assert gauss_tail(gamma, 1, x) == pytest.approx(
        math.exp(-gamma * x * x) / (2 * gamma), rel=1e-13
    )


@pytest.mark.parametrize("gamma,x", [(0.25, 1.0), (0.8, 3.0), (0.1, 6.0)])
def test_gauss_tail_n3_closed_form(gamma, x):
    expected = (1 + gamma * x * x) * math.exp(-gamma * x * x) / (2 * gamma * gamma)
    assert gauss_tail(gamma, 3, x) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
@pytest.mark.parametrize("gamma", [0.05, 0.25, 1.0, 3.0])
@pytest.mark.parametrize("x", [-2.0, 0.0, 0.5, 1.0, 4.0, 11.0])
def test_gauss_tail_matches_incomplete_gamma_oracle(n, gamma, x):
    assert gauss_tail(gamma, n, x) == pytest.approx(
        gauss_tail_oracle(gamma, n, x), rel=1e-12
    )


def test_gauss_tail_rejects_nonpositive_gamma():
    with pytest.raises(ParameterError):
        gauss_tail(0.0, 1, 1.0)
    with pytest.raises(ParameterError):
        gauss_tail(-1.0, 1, 1.0)


# ---------------------------------------------------------------------------
# tail_bound


def test_tail_bound_n0_literal():
    # e^{-1}/(2*0.25*2) = e^{-1}
    assert tail_bound(0.25, 0, 2.0) == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_tail_bound_n2_literal():
    assert tail_bound(0.25, 2, 4.0) == pytest.approx(64.0 * math.exp(-4.0), rel=1e-14)


def test_tail_bound_n3_is_quadratic_envelope():
    # upper-bound expression (x^2/gamma^2) e^{-gamma x^2}, not the exact closed form
    assert tail_bound(0.5, 3, 2.0) == pytest.approx(16.0 * math.exp(-2.0), rel=1e-14)


@pytest.mark.parametrize(
    "gamma,n,x",
    [(1.5, 0, 1.0), (0.5, 2, 0.5), (0.5, 3, 0.99), (0.5, 0, 0.0), (0.5, 1, -1.0), (-0.2, 1, 2.0)],
)
def test_tail_bound_rejects_out_of_range(gamma, n, x):
    with pytest.raises(ParameterError):
        tail_bound(gamma, n, x)


@given(
    gamma=st.floats(min_value=0.01, max_value=1.0),
    n=st.integers(min_value=0, max_value=3),
    x=st.floats(min_value=1.0, max_value=10.0),
)
@settings(max_examples=1000, derandomize=True)
def test_tail_bound_dominates_exact_tail(gamma, n, x):
    exact = gauss_tail(gamma, n, x)
    bound = tail_bound(gamma, n, x)
    assert bound >= exact * (1 - 1e-12)
    if n == 0:
        lower = x * math.exp(-gamma * x * x) / (2 * gamma * x * x + 1)
        assert exact >= lower * (1 - 1e-12)


# ---------------------------------------------------------------------------
# truncation_point


def test_truncation_point_beta_zero_floor():
    p = make_params(0.7, 1.0)
    tp = truncation_point(p, 1e-8)
    assert tp.x == 4.0
    assert tp.tail == 0.0
    assert not tp.degraded


def test_truncation_point_reference_case():
    p = make_params(0.5, 0.5)
    tp = truncation_point(p, 1e-8)
    assert 9.0 <= tp.x <= 12.0
    assert tp.tail <= 1e-8 or tp.degraded


def test_truncation_point_monotone_in_c():
    p_big = make_params(0.5, 0.5)
    p_small = make_params(0.01, 0.5)
    t_big = truncation_point(p_big, 1e-8)
    t_small = truncation_point(p_small, 1e-8)
    assert t_small.x >= t_big.x


def test_truncation_point_achieves_loose_tolerance():
    p = make_params(0.5, 0.5)
    tp = truncation_point(p, 1e-3)
    assert not tp.degraded
    assert tp.tail <= 1e-3
    beta = p.beta
    bound = (beta / (2 * p.c)) * (2 / (p.alpha * tp.x) + 16 * tp.x / p.alpha**2) * math.exp(
        -p.alpha * tp.x**2 / 4
    )
    assert tp.tail == pytest.approx(bound, rel=1e-12)
    # smallest-X bisection: a slightly smaller X violates the tolerance
    shrunk = (beta / (2 * p.c)) * (
        2 / (p.alpha * (tp.x - 1e-6)) + 16 * (tp.x - 1e-6) / p.alpha**2
    ) * math.exp(-p.alpha * (tp.x - 1e-6) ** 2 / 4)
    assert shrunk > 1e-3 * (1 - 1e-9)


def test_truncation_point_respects_cap_and_flags():
    p = make_params(0.5, 0.5)
    tp = truncation_point(p, 1e-30)
    assert tp.x == X_CAP
    assert tp.degraded
    assert tp.tail > 1e-30
