"""Period of the oscillation, and the series frequency ``Omega = pi / T``.

Three independent routes:

* energy-integral quadrature between the turning points (any problem);
* the closed form ``T = 4 K(k) / lambda`` for the hardening cubic oscillator,
  with ``K`` from the arithmetic-geometric mean;
* calibration: the frequency at which the sin-power coefficients stop
  decaying like ``n^(-3/2)`` and collapse geometrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

from anharmonic._io import dumps
from anharmonic.errors import (
    Equilibrium,
    ModulusOutOfRange,
    NoConvergence,
    NoMinimum,
    NonFinite,
    NonPeriodic,
    OutOfBranch,
    Separatrix,
)
from anharmonic.sin_series import compute_sin_coefficients

EQUILIBRIUM_RTOL = 1e-12
ROOT_RTOL = 1e-13
QUAD_RTOL = 1e-12
QUAD_START_NODES = 16
QUAD_MAX_NODES = 2**16
# a turning point whose slope is this small relative to the well depth is a double root
SEPARATRIX_RTOL = 1e-9
CLUSTER_RTOL = 1e-6
CALIBRATION_TERMS = 256
CALIBRATION_RTOL = 1e-10
CALIBRATION_SCAN = 41
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
# relative half-widths tried when bracketing the sign change of c_N
POLISH_STEPS = (1e-9, 1e-8, 1e-7, 1e-6)


@dataclass(frozen=True)
class PeriodEstimate:
    T: float
    omega_pi_over_T: float
    x_minus: float
    x_plus: float
    method: str
    err_estimate: float

    def to_dict(self):
        return {
            "T": self.T,
            "omega": self.omega_pi_over_T,
            "turning_points": [self.x_minus, self.x_plus],
            "method": self.method,
            "err": self.err_estimate,
        }

    def to_json(self):
        return dumps(self.to_dict())

    def rescaled(self, time_scale):
        """Same estimate in physical time ``t / time_scale``."""
        T = self.T / time_scale
        return PeriodEstimate(T, math.pi / T, self.x_minus, self.x_plus, self.method, self.err_estimate / time_scale)


def _estimate(T, x_minus, x_plus, method, err):
    return PeriodEstimate(float(T), math.pi / float(T), float(x_minus), float(x_plus), method, float(err))


def potential_energy(problem, x):
    """``V(x) = -(A x + B x^2/2 + C x^3/3 + D x^4/4)``, so that ``v'' = -V'(v)``."""
    return -x * (problem.A + x * (problem.B / 2.0 + x * (problem.C / 3.0 + x * problem.D / 4.0)))


def _kinetic_poly(problem):
    """Coefficients (highest power first) of ``P(x) = E - V(x)``, ``E = V(v0)``."""
    p = [problem.D / 4.0, problem.C / 3.0, problem.B / 2.0, problem.A, 0.0]
    p[-1] = potential_energy(problem, problem.v0)
    p = np.array(p)
    nz = np.flatnonzero(p[:-1])
    return p[nz[0]:] if len(nz) else p[-1:]


def _deflate(p, root):
    """Synthetic division of ``p`` by ``(x - root)``; remainder dropped."""
    q = np.zeros(len(p) - 1)
    acc = 0.0
    for i in range(len(p) - 1):
        acc = acc * root + p[i]
        q[i] = acc
    return q


def _polish(p, dp, inside, outside):
    """Root of ``p`` in the bracket, ``p(inside) > 0 > p(outside)``: bisection
    until the bracket is tight, then safeguarded Newton."""
    lo, hi = inside, outside
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if abs(hi - lo) <= 1e-6 * max(1.0, abs(mid)):
            break
        if np.polyval(p, mid) > 0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(50):
        fx = np.polyval(p, x)
        if fx == 0:
            return x
        if fx > 0:
            lo = x
        else:
            hi = x
        slope = np.polyval(dp, x)
        step = fx / slope if slope != 0 else math.inf
        nxt = x - step
        if not (min(lo, hi) <= nxt <= max(lo, hi)):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= ROOT_RTOL * max(abs(nxt), 1e-300):
            return nxt
        x = nxt
    return x


def turning_points(problem):
    """Turning points ``(x_minus, x_plus)`` of the well containing ``v0``.

    ``v0`` is one of them; the other is the nearest root of ``E - V(x)`` on the
    side the force points to, found by deflating ``x = v0``.
    """
    v0 = problem.v0
    force = problem.initial_force()
    curvature = -problem.force_derivative(v0)
    if abs(force) <= EQUILIBRIUM_RTOL * (1.0 + abs(curvature) * abs(v0)):
        raise Equilibrium(f"v0 = {v0!r} is a critical point of the potential")
    direction = 1.0 if force > 0 else -1.0
    p = _kinetic_poly(problem)
    dp = np.polyder(p)
    q = _deflate(p, v0)
    if len(q) <= 1:
        raise NonPeriodic("force is constant; the motion is unbounded")
    roots = np.roots(q)
    candidates = []
    for r in roots:
        if abs(r.imag) <= 1e-7 * max(1.0, abs(r.real)) and (r.real - v0) * direction > 0:
            candidates.append(r.real)
    if not candidates:
        raise NonPeriodic(f"no turning point on the {'right' if direction > 0 else 'left'} of v0; motion escapes")
    candidates.sort(key=lambda r: abs(r - v0))
    other = candidates[0]
    width = abs(other - v0)
    depth = np.polyval(p, 0.5 * (v0 + other))
    if depth <= 0:
        raise Separatrix("no allowed region between v0 and the next root")
    # np.roots splits a double root into a pair ~sqrt(eps) apart
    clustered = len(candidates) > 1 and abs(candidates[1] - other) <= CLUSTER_RTOL * width
    if clustered or abs(np.polyval(dp, other)) * width <= SEPARATRIX_RTOL * depth:
        raise Separatrix(f"turning point {other!r} is a double root; the period is infinite")
    # bracket must stop short of any further root
    gap = width
    if len(candidates) > 1:
        gap = min(gap, abs(candidates[1] - other))
    inside = other - direction * 0.25 * width
    outside = other + direction * 0.25 * gap
    if np.polyval(p, outside) >= 0:
        raise Separatrix(f"turning point {other!r} does not change sign; double root")
    other = _polish(p, dp, inside, outside)
    return (other, v0) if direction < 0 else (v0, other)


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    x, w = roots_legendre(n)
    return x, w


def period_by_quadrature(problem, nodes=QUAD_START_NODES):
    """``T = 2 int dx / sqrt(2 (E - V(x)))`` between the turning points.

    With ``x = m + h sin(theta)`` the endpoint singularities cancel exactly:
    ``E - V = (x - x_minus)(x_plus - x) R(x)`` and the integrand becomes
    ``1 / sqrt(2 R)``. Gauss-Legendre nodes are doubled from ``nodes`` until
    successive estimates agree to ``1e-12 T``.
    """
    x_minus, x_plus = turning_points(problem)
    p = _kinetic_poly(problem)
    # (x - x_minus)(x_plus - x) = -(x^2 - (x_minus + x_plus) x + x_minus x_plus)
    r, _ = np.polydiv(p, -np.array([1.0, -(x_minus + x_plus), x_minus * x_plus]))
    mid = 0.5 * (x_plus + x_minus)
    half = 0.5 * (x_plus - x_minus)

    def estimate(n):
        theta, weights = _gauss_legendre(n)
        x = mid + half * np.sin(0.5 * math.pi * theta)
        rx = np.polyval(r, x)
        if np.any(rx <= 0):
            raise Separatrix("reduced integrand vanishes inside the well")
        return 2.0 * 0.5 * math.pi * float(np.dot(weights, 1.0 / np.sqrt(2.0 * rx)))

    n = max(int(nodes), 2)
    prev = estimate(n)
    while True:
        n *= 2
        if n > QUAD_MAX_NODES:
            raise NoConvergence(f"quadrature did not converge with {QUAD_MAX_NODES} nodes")
        cur = estimate(n)
        diff = abs(cur - prev)
        if diff < QUAD_RTOL * cur:
            return _estimate(cur, x_minus, x_plus, "quadrature", diff)
        prev = cur


def elliptic_K_agm(k):
    """Complete elliptic integral of the first kind for modulus ``k``:
    ``K(k) = pi / (2 AGM(1, sqrt(1 - k^2)))``."""
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise ModulusOutOfRange(f"modulus must lie in [0, 1), got {k}")
    a, g = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(64):
        if abs(a - g) <= 1e-16 * a:
            break
        a, g = 0.5 * (a + g), math.sqrt(a * g)
    return math.pi / (2.0 * a)


def period_duffing_closed_form(omega, beta, a0):
    """Period of ``u'' + omega^2 u = -beta u^3``, ``u(0) = a0``, for ``beta >= 0``.

    ``u = a0 cn(lambda t, k)`` with ``lambda^2 = omega^2 + beta a0^2`` and
    ``k^2 = beta a0^2 / (2 lambda^2)``, so ``T = 4 K(k) / lambda``.
    """
    omega, beta, a0 = float(omega), float(beta), float(a0)
    if beta < 0:
        raise OutOfBranch("closed form covers the hardening branch beta >= 0 only")
    lam2 = omega**2 + beta * a0**2
    if not lam2 > 0:
        raise OutOfBranch("omega^2 + beta a0^2 must be positive")
    lam = math.sqrt(lam2)
    k = math.sqrt(beta * a0**2 / (2.0 * lam2))
    T = 4.0 * elliptic_K_agm(k) / lam
    # AGM converges to round-off
    return _estimate(T, -abs(a0), abs(a0), "closed-form", 4.0 * np.finfo(float).eps * T)


def tail_objective(problem, omega_series, n_terms):
    """``max |c_n| n^(3/2)`` over even ``n`` in ``[N/2, N]``; ``inf`` on overflow."""
    try:
        c = compute_sin_coefficients(problem, omega_series, n_terms).coeffs
    except NonFinite:
        return math.inf
    n = np.arange(len(c))
    sel = (n >= n_terms // 2) & (n % 2 == 0)
    with np.errstate(over="ignore", invalid="ignore"):
        value = float(np.max(np.abs(c[sel]) * n[sel] ** 1.5))
    return value if math.isfinite(value) else math.inf


def calibrate_frequency(problem, n_terms=CALIBRATION_TERMS, bracket=None):
    """Series frequency at which the sin-power coefficients decay fastest.

    A logarithmic scan of the tail objective locates the basin, then
    golden-section search narrows it to relative width ``1e-10``, and a
    root of the last even coefficient near that point polishes the result.
    ``bracket`` defaults to ``[0.5, 2] * pi / T`` with ``T`` from quadrature.
    """
    n_terms = int(n_terms)
    if n_terms < 32:
        raise ValueError(f"calibration needs n_terms >= 32, got {n_terms}")
    if bracket is None:
        centre = period_by_quadrature(problem).omega_pi_over_T
        bracket = (0.5 * centre, 2.0 * centre)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 < lo < hi:
        raise ValueError(f"invalid bracket {bracket}")

    def J(w):
        return tail_objective(problem, w, n_terms)

    grid = np.geomspace(lo, hi, CALIBRATION_SCAN)
    values = np.array([J(w) for w in grid])
    if not np.any(np.isfinite(values)):
        raise NoMinimum("series diverges across the whole bracket")
    # interior basins only: Omega*/m (m = 2, 3, ...) also give convergent
    # series, so an edge minimum is a sub-harmonic or a too-narrow bracket
    interior = [i for i in range(1, len(grid) - 1) if values[i] <= values[i - 1] and values[i] <= values[i + 1]]
    if not interior:
        raise NoMinimum("tail objective is monotone over the bracket")
    best = min(interior, key=lambda i: values[i])
    if values[best] == 0.0:
        return float(grid[best])
    a, b = grid[best - 1], grid[best + 1]
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = J(x1), J(x2)
    while b - a > CALIBRATION_RTOL * 0.5 * (a + b):
        if f1 == 0.0:
            return float(x1)
        if f2 == 0.0:
            return float(x2)
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = J(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = J(x2)
    return _polish_frequency(problem, float(0.5 * (a + b)), n_terms)


def _last_even(problem, w, n_terms):
    try:
        c = compute_sin_coefficients(problem, w, n_terms).coeffs
    except NonFinite:
        return math.nan
    return float(c[n_terms - n_terms % 2])


def _polish_frequency(problem, w, n_terms):
    """Refine ``w`` to the sign change of the last even coefficient.

    Off the convergent frequency the tail is dominated by a term linear in
    the frequency error, so ``c_N`` changes sign there; a root of it is far
    sharper than the minimum of ``|c_N|``. Falls back to ``w`` when no sign
    change is found close by.
    """
    f0 = _last_even(problem, w, n_terms)
    if not math.isfinite(f0) or f0 == 0.0:
        return w
    for h in POLISH_STEPS:
        lo, hi = w * (1.0 - h), w * (1.0 + h)
        f_lo, f_hi = _last_even(problem, lo, n_terms), _last_even(problem, hi, n_terms)
        if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
            return w
        if f_lo * f0 <= 0:
            hi, f_hi = w, f0
        elif f_hi * f0 <= 0:
            lo, f_lo = w, f0
        else:
            continue
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        return float(brentq(lambda x: _last_even(problem, x, n_terms), lo, hi, xtol=1e-16 * w, rtol=1e-15))
    return w


def period_by_calibration(problem, n_terms=CALIBRATION_TERMS, bracket=None):
    """Period ``pi / Omega*`` from calibration; turning points from the well."""
    x_minus, x_plus = turning_points(problem)
    w = calibrate_frequency(problem, n_terms, bracket)
    T = math.pi / w
    return _estimate(T, x_minus, x_plus, "calibration", CALIBRATION_RTOL * T)
