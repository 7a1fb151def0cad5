import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anharmonic import (
    GeneralProblem,
    NonFinite,
    SinPowerSeries,
    calibrate_frequency,
    compute_sin_coefficients,
    evaluate_sin_series,
    integrate,
    make_cubic_normalized,
    make_quadratic_shifted,
    make_raw,
    ode_residual,
    period_by_quadrature,
    quarter_period_sums,
)

from conftest import dop853

HARMONIC = make_raw(1.0, 0.0, 0.0, 1.0)


def brute_force_coefficients(problem, omega, n_terms):
    """Textbook double loop with explicit triple sums, no shared code."""
    c = [0.0] * (n_terms + 1)
    c[0] = problem.v0
    c[2] = problem.force(problem.v0) / (2 * omega**2)
    for n in range(1, n_terms - 1):
        sq = sum(c[r] * c[n - r] for r in range(n + 1))
        cube = sum(c[m] * c[r] * c[n - m - r] for r in range(n + 1) for m in range(n - r + 1))
        rhs = n * n * c[n] + (problem.B * c[n] + problem.C * sq + problem.D * cube) / omega**2
        c[n + 2] = rhs / ((n + 1) * (n + 2))
    return np.array(c)


def test_initial_coefficients():
    problem, _ = make_quadratic_shifted(1.0, 1.0, 0.1)
    s = compute_sin_coefficients(problem, 1.0, 8)
    assert s.coeffs[0] == pytest.approx(0.6, abs=1e-15)
    assert s.coeffs[2] == pytest.approx(-0.055, rel=1e-14)


def test_c4_from_recursion():
    problem, _ = make_quadratic_shifted(1.0, 1.0, 0.1)
    s = compute_sin_coefficients(problem, 1.0, 8)
    assert s.coeffs[4] == pytest.approx(-0.055 * 2.8 / 12, rel=1e-14)
    assert s.coeffs[4] == pytest.approx(-0.0128333333333333, rel=1e-12)


@pytest.mark.parametrize("omega,beta,a0", [(1.0, 2.0, 0.1), (1.5, -0.7, 0.4), (0.6, 3.0, -0.05)])
def test_alternative_c4_form_differs_by_factor_beta(omega, beta, a0):
    problem, _ = make_quadratic_shifted(omega, beta, a0)
    c = compute_sin_coefficients(problem, omega, 8).coeffs
    x = a0 * beta / omega**2
    alternative = -(beta / (6 * omega**2)) * a0 * (omega**2 + a0 * beta) * (0.75 - x / 2)
    assert c[4] == pytest.approx(c[2] * (3 - 2 * x) / 12, rel=1e-13)
    assert alternative / c[4] == pytest.approx(beta, rel=1e-12)


def test_harmonic_terminates_at_half_frequency():
    s = compute_sin_coefficients(HARMONIC, 0.5, 8)
    assert s.coeffs.tolist() == [1.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    assert evaluate_sin_series(s, math.pi) == pytest.approx(-1.0, abs=1e-15)


def test_trivial_solution_annihilation():
    omega, beta = 1.3, 0.7
    problem, _ = make_quadratic_shifted(omega, beta, -omega**2 / beta)
    for w in (0.3, 1.0, 2.5):
        c = compute_sin_coefficients(problem, w, 64).coeffs
        assert np.all(c[1:] == 0.0)


def test_matches_brute_force_oracle():
    for problem in (make_quadratic_shifted(1.2, 0.8, 0.3)[0], make_cubic_normalized(1.0, 0.7, 1.0)[0],
                    GeneralProblem(0.1, -0.8, 0.3, -0.2, 0.9)):
        fast = compute_sin_coefficients(problem, 0.45, 24).coeffs
        slow = brute_force_coefficients(problem, 0.45, 24)
        np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-15 * np.max(np.abs(slow)))


def test_compensated_path_agrees():
    problem = make_cubic_normalized(1.0, 0.4, 1.0)[0]
    w = calibrate_frequency(problem)
    plain = compute_sin_coefficients(problem, w, 128).coeffs
    exact = compute_sin_coefficients(problem, w, 200).coeffs[:129]
    np.testing.assert_allclose(plain, exact, rtol=1e-12, atol=1e-15)


def test_evaluate_against_oracle():
    problem, _ = make_quadratic_shifted(1.0, 1.0, 0.1)
    s = compute_sin_coefficients(problem, calibrate_frequency(problem), 64)
    ref = integrate(problem, 0.7, tol=1e-12, samples=2).values[-1]
    assert evaluate_sin_series(s, 0.7) == pytest.approx(ref, abs=1e-8)
    assert evaluate_sin_series(s, 0.7) == pytest.approx(dop853(problem, [0.7])[0], abs=1e-8)


def test_evaluate_is_deterministic_and_vectorized():
    problem, _ = make_quadratic_shifted(1.0, 1.0, 0.2)
    s = compute_sin_coefficients(problem, 0.49, 32)
    t = np.linspace(0, 10, 17)
    vec = evaluate_sin_series(s, t)
    assert [evaluate_sin_series(s, x) for x in t] == vec.tolist()


def test_residuals():
    equilibrium = compute_sin_coefficients(make_quadratic_shifted(1.0, 1.0, -1.0)[0], 0.7, 16)
    assert ode_residual(equilibrium, 1.234) == 0.0
    h = compute_sin_coefficients(HARMONIC, 0.5, 8)
    t = np.linspace(0, 20, 101)
    assert np.max(np.abs(ode_residual(h, t))) <= 1e-14


def test_residual_decreases_with_order():
    problem, _ = make_quadratic_shifted(1.0, 1.0, 0.1)
    w = calibrate_frequency(problem)
    t = np.linspace(0, math.pi / w, 257)
    res = [np.max(np.abs(ode_residual(compute_sin_coefficients(problem, w, n), t))) for n in (8, 16, 32, 64)]
    # N = 8/16/32/64 on this problem: ~2e-3, ~1e-6, ~1e-13, round-off
    assert res[0] > res[1] > res[2]
    assert res[2] < 1e-6


def test_quarter_period_sums():
    eq = compute_sin_coefficients(make_quadratic_shifted(1.0, 1.0, -1.0)[0], 0.7, 16)
    assert quarter_period_sums(eq) == (-0.5, 0.0)
    h = compute_sin_coefficients(HARMONIC, 0.5, 2)
    assert quarter_period_sums(h) == (-1.0, -4.0)


def test_quarter_period_sums_are_series_value_at_turning_point():
    problem, _ = make_quadratic_shifted(1.0, 1.0, 0.1)
    s = compute_sin_coefficients(problem, calibrate_frequency(problem), 64)
    S, _ = quarter_period_sums(s)
    x_minus = period_by_quadrature(problem).x_minus
    assert S == pytest.approx(x_minus, abs=1e-10)


def test_overflow_reports_index():
    problem, _ = make_quadratic_shifted(1.0, -1.0, 50.0)
    with pytest.raises(NonFinite) as info:
        compute_sin_coefficients(problem, 0.05, 512)
    assert info.value.index is not None and info.value.index > 2


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        compute_sin_coefficients(HARMONIC, 0.0, 8)
    with pytest.raises(ValueError):
        compute_sin_coefficients(HARMONIC, 0.5, 1)


def test_serialization_round_trip():
    problem, _ = make_quadratic_shifted(1.0, 1.0, 0.1)
    s = compute_sin_coefficients(problem, 0.4977, 32)
    data = json.loads(s.to_json())
    assert {"omega_series", "coefficients", "n_terms"} <= set(data)
    back = SinPowerSeries.from_dict(data)
    assert np.array_equal(back.coeffs, s.coeffs)
    t = np.linspace(0, 7, 33)
    assert np.array_equal(evaluate_sin_series(back, t), evaluate_sin_series(s, t))
    lines = s.to_csv().splitlines()
    assert lines[0] == "index,coefficient" and len(lines) == 34


# --- properties ----------------------------------------------------------------

positive = st.floats(0.2, 5.0)
nonzero_beta = st.floats(0.1, 4.0) | st.floats(-4.0, -0.1)


@settings(max_examples=25, deadline=None)
@given(st.floats(-1, 1), st.floats(-2, 0.5), st.floats(-1, 1), st.floats(-1, 1), st.floats(-2, 2), st.floats(0.2, 3))
def test_parity_to_512(A, B, C, D, v0, w):
    if A == B == C == D == 0:
        return
    problem = GeneralProblem(A, B, C, D, v0)
    try:
        c = compute_sin_coefficients(problem, w, 512).coeffs
    except NonFinite:
        return
    assert np.all(c[1::2] == 0.0)
    assert c[0] == problem.v0


@settings(max_examples=100, deadline=None)
@given(positive, nonzero_beta, st.floats(-1.0, 1.0))
def test_specialization_closed_forms(omega, beta, x):
    a0 = x * omega**2 / beta
    problem, _ = make_quadratic_shifted(omega, beta, a0)
    c = compute_sin_coefficients(problem, omega, 8).coeffs
    c0 = a0 + omega**2 / (2 * beta)
    c2 = -(a0 / (2 * omega**2)) * (omega**2 + a0 * beta)
    assert c[0] == pytest.approx(c0, rel=1e-14, abs=1e-14 * abs(omega**2 / beta))
    assert c[2] == pytest.approx(c2, rel=1e-14, abs=1e-14 * abs(omega**2 / beta))


@settings(max_examples=50, deadline=None)
@given(positive, nonzero_beta, st.floats(0.1, 3.0))
def test_annihilation_property(omega, beta, w):
    problem, _ = make_quadratic_shifted(omega, beta, -omega**2 / beta)
    c = compute_sin_coefficients(problem, w, 64).coeffs
    assert np.max(np.abs(c[1:])) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 2.0), st.floats(0.01, 2.0), st.floats(0.01, 2.0), st.floats(0.2, 3.0))
def test_positivity_premise(c0, c2_target, C, w):
    # A >= 0 and C > 0 with c0 > 0; choose A so that c2 > 0
    A = 2 * w**2 * c2_target - C * c0**2
    if A < 0:
        return
    problem = GeneralProblem(A, 0.0, C, 0.0, c0)
    try:
        c = compute_sin_coefficients(problem, w, 128).coeffs
    except NonFinite:
        return
    assert np.all(c >= 0)
