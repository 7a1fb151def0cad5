"""Reference trajectories from an adaptive Dormand-Prince 5(4) integrator.

Independent of every series routine; used as ground truth in tests and in
the ``compare``/``verify`` commands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from anharmonic._io import csv_text
from anharmonic.errors import NonFinite, NoTurning, StepUnderflow

# Dormand & Prince (1980), 5th-order solution with embedded 4th-order estimate
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

_SAFETY = 0.9
_PI_ALPHA = 0.7 / 5
_PI_BETA = 0.4 / 5
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    values: np.ndarray
    velocities: np.ndarray
    tol: float
    stats: dict = field(default_factory=dict)
    problem: object = None

    def energy(self):
        """``v'^2/2 + V(v)`` at every sample."""
        from anharmonic.period import potential_energy

        return 0.5 * self.velocities**2 + potential_energy(self.problem, self.values)

    def to_csv(self):
        return csv_text(["t", "v", "v_prime"], zip(self.times, self.values, self.velocities))


def integrate(problem, t_end, tol=1e-10, samples=129):
    """Integrate ``v'' = force(v)`` from ``(v0, 0)`` and record ``samples``
    equally spaced times on ``[0, t_end]``.

    Steps are shortened to land exactly on sample times, so no interpolant
    is involved. ``tol`` is the relative tolerance; the absolute floor is
    ``tol`` times the initial amplitude.
    """
    tol = float(tol)
    t_end = float(t_end)
    if not 1e-13 <= tol <= 1e-3:
        raise ValueError(f"tol must lie in [1e-13, 1e-3], got {tol}")
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    samples = int(samples)
    if samples < 2:
        raise ValueError("need at least two samples")

    force = problem.force

    def rhs(y):
        return np.array([y[1], force(y[0])])

    sample_times = np.linspace(0.0, t_end, samples)
    out = np.empty((samples, 2))
    y = np.array([problem.v0, 0.0])
    out[0] = y
    scale = abs(problem.v0) if problem.v0 != 0 else 1.0
    atol = tol * scale

    # initial step from the local acceleration scale
    accel = abs(force(problem.v0))
    h = 0.01 * t_end if accel == 0 else min(0.01 * t_end, 0.1 * math.sqrt(scale / accel))
    t = 0.0
    k1 = rhs(y)
    prev_err = 1.0
    n_accept = n_reject = n_eval = 0
    idx = 1
    while idx < samples:
        target = sample_times[idx]
        h_try = min(h, target - t)
        landing = h_try == target - t
        if h_try <= 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise StepUnderflow(f"step size underflow at t = {float(t)!r}")
        k = [k1]
        for s in range(1, 7):
            ys = y + h_try * sum(a * kk for a, kk in zip(_A[s], k))
            k.append(rhs(ys))
        n_eval += 6
        y_new = y + h_try * sum(b * kk for b, kk in zip(_B5, k) if b != 0.0)
        err_vec = h_try * sum(e * kk for e, kk in zip(_E, k) if e != 0.0)
        sc = atol + tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / sc))
        if not np.all(np.isfinite(y_new)) or not math.isfinite(err):
            n_reject += 1
            h = 0.1 * h_try
            continue
        if err <= 1.0:
            n_accept += 1
            t = target if landing else t + h_try
            y = y_new
            k1 = k[6]  # first-same-as-last
            factor = _SAFETY * max(err, 1e-10) ** -_PI_ALPHA * prev_err**_PI_BETA
            prev_err = max(err, 1e-4)
            h_next = h_try * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            # keep the unclipped proposal when the step was shortened to land
            h = max(h, h_next) if landing else h_next
            if landing:
                out[idx] = y
                idx += 1
        else:
            n_reject += 1
            factor = _SAFETY * err**-_PI_ALPHA
            h = h_try * max(_MIN_FACTOR, factor)
    if not np.all(np.isfinite(out)):
        raise NonFinite("trajectory is not finite")
    stats = {"accepted": n_accept, "rejected": n_reject, "evaluations": n_eval + 1}
    return Trajectory(sample_times, out[:, 0].copy(), out[:, 1].copy(), tol, stats, problem)


def _hermite5(t0, t1, y0, y1, d0, d1, a0, a1):
    """Quintic Hermite interpolant through value, slope and curvature at both
    ends; returns (value, derivative) callables on ``[t0, t1]``."""
    h = t1 - t0
    # coefficients in u = (t - t0) / h
    m = np.array(
        [
            [1, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0],
            [0, 0, 2, 0, 0, 0],
            [1, 1, 1, 1, 1, 1],
            [0, 1, 2, 3, 4, 5],
            [0, 0, 2, 6, 12, 20],
        ],
        dtype=float,
    )
    rhs = np.array([y0, d0 * h, a0 * h * h, y1, d1 * h, a1 * h * h])
    coef = np.linalg.solve(m, rhs)[::-1]
    dcoef = np.polyder(coef)

    def value(t):
        return np.polyval(coef, (t - t0) / h)

    def slope(t):
        return np.polyval(dcoef, (t - t0) / h) / h

    return value, slope


def turning_events(traj):
    """``(time, amplitude)`` at every sign change of the velocity after ``t = 0``."""
    t, v, dv = traj.times, traj.values, traj.velocities
    acc = traj.problem.force(v)
    events = []
    for i in range(1, len(t) - 1):
        if dv[i] == 0.0:
            events.append((t[i], v[i]))
            continue
        if dv[i] * dv[i + 1] < 0:
            value, slope = _hermite5(t[i], t[i + 1], v[i], v[i + 1], dv[i], dv[i + 1], acc[i], acc[i + 1])
            tr = brentq(slope, t[i], t[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            events.append((tr, float(value(tr))))
    if len(t) > 1 and dv[-1] == 0.0:
        events.append((t[-1], v[-1]))
    return events


def detect_turning_points(traj):
    """Amplitudes at which the velocity changes sign (the initial point is
    itself a turning point and is included)."""
    events = turning_events(traj)
    if not events:
        raise NoTurning("velocity never changes sign")
    return [float(traj.values[0])] + [amp for _, amp in events]
