import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from anharmonic import (
    Equilibrium,
    ModulusOutOfRange,
    NoMinimum,
    NonPeriodic,
    OutOfBranch,
    Separatrix,
    calibrate_frequency,
    detect_turning_points,
    integrate,
    elliptic_K_agm,
    make_cubic_normalized,
    make_quadratic_shifted,
    make_raw,
    period_by_quadrature,
    period_duffing_closed_form,
    potential_energy,
    turning_points,
)
from anharmonic.period import period_by_calibration

HARMONIC = make_raw(1.0, 0.0, 0.0, 1.0)
DUFFING = make_raw(1.0, 0.0, 1.0, 1.0)


def K_quad(k):
    value, _ = quad(lambda th: 1.0 / math.sqrt(1.0 - (k * math.sin(th)) ** 2), 0, math.pi / 2,
                    epsabs=1e-15, epsrel=1e-13, limit=200)
    return value


def test_potential_examples():
    assert potential_energy(HARMONIC, 1.0) == 0.5
    assert potential_energy(DUFFING, 1.0) == 0.75
    quadratic, _ = make_quadratic_shifted(1.0, 1.0, 0.1)
    for x in (-1.0, 0.3, 2.0):
        assert potential_energy(quadratic, x) == pytest.approx(-x / 4 + x**3 / 3, rel=1e-15)


def test_turning_points_symmetric():
    assert turning_points(HARMONIC) == pytest.approx((-1.0, 1.0), abs=1e-15)
    assert turning_points(DUFFING) == pytest.approx((-1.0, 1.0), abs=1e-15)


def test_turning_points_quadratic_vs_oracle():
    problem, _ = make_quadratic_shifted(1.0, 1.0, 0.1)
    x_minus, x_plus = turning_points(problem)
    assert x_plus == 0.6
    # other root of the deflated quadratic x^2 + 0.6 x + 0.36 - 0.75 = 0
    assert x_minus == pytest.approx((-0.6 + math.sqrt(0.36 + 4 * 0.39)) / 2, rel=1e-13)
    amplitudes = detect_turning_points(integrate(problem, 7.0, tol=1e-12, samples=200))
    assert amplitudes[1] == pytest.approx(x_minus, abs=1e-9)


def test_turning_point_errors():
    with pytest.raises(Equilibrium):
        turning_points(make_quadratic_shifted(1.0, 1.0, -1.0)[0])
    with pytest.raises(Equilibrium):
        turning_points(make_raw(1.0, 0.0, 0.0, 0.0))
    # beyond the hilltop of the quadratic well
    with pytest.raises(NonPeriodic):
        turning_points(make_quadratic_shifted(1.0, 1.0, -1.5)[0])
    # softening cubic above the barrier
    with pytest.raises(NonPeriodic):
        turning_points(make_raw(1.0, 0.0, -1.0, 1.5))
    # u'' = -u - u^2 from u = 1/2 has exactly the hilltop energy V(-1) = 1/6
    with pytest.raises(Separatrix):
        turning_points(make_quadratic_shifted(1.0, 1.0, 0.5)[0])


def test_quadrature_harmonic():
    est = period_by_quadrature(HARMONIC)
    assert abs(est.T - 2 * math.pi) < 1e-12
    assert est.omega_pi_over_T == math.pi / est.T
    assert est.method == "quadrature"


def test_quadrature_equilibrium():
    with pytest.raises(Equilibrium):
        period_by_quadrature(make_quadratic_shifted(1.0, 1.0, -1.0)[0])


def test_duffing_examples():
    q = period_by_quadrature(DUFFING)
    c = period_duffing_closed_form(1.0, 1.0, 1.0)
    assert abs(q.T - c.T) <= 1e-10 * c.T
    assert c.T == pytest.approx(4 * 1.6857503548125961 / math.sqrt(2), rel=1e-14)
    assert period_duffing_closed_form(2.0, 0.0, 0.7).T == pytest.approx(math.pi, rel=1e-15)
    with pytest.raises(OutOfBranch):
        period_duffing_closed_form(1.0, -0.5, 1.0)


def test_K_values():
    assert elliptic_K_agm(0.0) == math.pi / 2
    assert elliptic_K_agm(0.5) == pytest.approx(K_quad(0.5), rel=1e-14)
    assert elliptic_K_agm(0.5) == pytest.approx(1.6857503548125961, rel=1e-15)
    big = elliptic_K_agm(0.999999)
    assert math.isfinite(big) and big == pytest.approx(K_quad(0.999999), rel=1e-9)
    for bad in (1.0, 1.5, -0.1):
        with pytest.raises(ModulusOutOfRange):
            elliptic_K_agm(bad)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.99))
def test_K_against_quadrature(k):
    assert elliptic_K_agm(k) == pytest.approx(K_quad(k), rel=1e-12)


def test_closed_form_vs_quadrature_random():
    rng = np.random.default_rng(11)
    for _ in range(50):
        omega, beta, a0 = rng.uniform(0.2, 3), rng.uniform(0, 5), rng.uniform(-3, 3)
        q = period_by_quadrature(make_raw(omega, 0.0, beta, a0))
        c = period_duffing_closed_form(omega, beta, a0)
        assert abs(q.T - c.T) <= 1e-10 * c.T


def test_hardening_period_decreases_with_amplitude():
    T = [period_by_quadrature(make_raw(1.0, 0.0, 1.0, a)).T for a in np.linspace(0.1, 3.0, 20)]
    assert np.all(np.diff(T) < 0)


@pytest.mark.parametrize("problem", [
    make_quadratic_shifted(1.3, 0.7, 1e-4)[0],
    make_raw(1.3, 0.0, 0.7, 1e-4),
    make_raw(1.3, 0.0, -0.7, 1e-4),
])
def test_small_amplitude_limit(problem):
    assert period_by_quadrature(problem).T == pytest.approx(2 * math.pi / 1.3, rel=1e-6)


def test_estimate_serialization():
    data = json.loads(period_by_quadrature(DUFFING).to_json())
    assert set(data) == {"T", "omega", "turning_points", "method", "err"}
    assert data["turning_points"] == [-1.0, 1.0]


def test_rescaled_normalized_period():
    omega, beta, a0 = 2.0, 3.0, 0.5
    raw = period_by_quadrature(make_raw(omega, 0.0, beta, a0)).T
    problem, shift = make_cubic_normalized(omega, beta, a0)
    normalized = period_by_quadrature(problem).rescaled(shift.time_scale)
    assert normalized.T == pytest.approx(raw, rel=1e-12)


def test_calibration_harmonic():
    assert calibrate_frequency(HARMONIC) == pytest.approx(0.5, abs=1e-8)


def test_calibration_duffing():
    w = calibrate_frequency(DUFFING)
    assert w == pytest.approx(math.pi / period_duffing_closed_form(1.0, 1.0, 1.0).T, rel=1e-6)
    assert w == pytest.approx(0.658888, abs=1e-6)


def test_calibration_quadratic_and_gap():
    problem, _ = make_quadratic_shifted(1.0, 1.0, 0.1)
    w = calibrate_frequency(problem)
    assert abs(w - period_by_quadrature(problem).omega_pi_over_T) <= 1e-6 * w
    # the series frequency is near omega/2, not omega
    assert abs(w - 1.0) > 0.4


def test_calibration_on_grid(grid):
    for label, problem in grid:
        w = calibrate_frequency(problem)
        ref = period_by_quadrature(problem).omega_pi_over_T
        assert abs(w - ref) <= 1e-6 * w, label


def test_calibration_errors():
    with pytest.raises(ValueError):
        calibrate_frequency(HARMONIC, n_terms=16)
    with pytest.raises(NoMinimum):
        calibrate_frequency(DUFFING, bracket=(0.9, 1.0))


def test_period_by_calibration():
    est = period_by_calibration(DUFFING)
    assert est.method == "calibration"
    assert est.T == pytest.approx(period_duffing_closed_form(1.0, 1.0, 1.0).T, rel=1e-6)
