"""Sin-power series ``v(t) = sum_n c_n sin(Omega t)^n``.

Substituting the ansatz into ``v'' = A + B v + C v^2 + D v^3`` and
collecting powers of ``s = sin(Omega t)`` gives, for ``n >= 1``::

    (n+1)(n+2) c[n+2] = n^2 c[n] + (B c[n] + C (c*c)[n] + D (c*c*c)[n]) / Omega^2

with ``*`` the Cauchy product, and ``2 Omega^2 c[2] = A + B c0 + C c0^2 + D c0^3``
from the constant term. The series converges on ``|s| <= 1`` only when
``Omega = pi / T`` with ``T`` the period of the solution; other frequencies
leave a ``(1 - s)^(1/2)`` singularity at the quarter period and the tail
decays no faster than ``n^(-3/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from anharmonic._io import csv_text, dumps
from anharmonic.errors import NonFinite
from anharmonic.model import GeneralProblem

# above this order dot products inside the recursion use exact summation
COMPENSATED_THRESHOLD = 128


@dataclass(frozen=True, eq=False)
class SinPowerSeries:
    omega_series: float
    coeffs: np.ndarray
    problem: GeneralProblem

    @property
    def n_terms(self):
        return len(self.coeffs) - 1

    def to_dict(self):
        return {
            "omega_series": self.omega_series,
            "coefficients": [float(c) for c in self.coeffs],
            "n_terms": self.n_terms,
            "problem": self.problem.to_dict(),
        }

    def to_json(self):
        return dumps(self.to_dict())

    def to_csv(self):
        return csv_text(["index", "coefficient"], [(i, float(c)) for i, c in enumerate(self.coeffs)])

    @classmethod
    def from_dict(cls, data):
        return cls(
            omega_series=float(data["omega_series"]),
            coeffs=np.asarray(data["coefficients"], dtype=float),
            problem=GeneralProblem.from_dict(data["problem"]),
        )


def _dot(a, b, exact):
    if exact:
        return math.fsum((a * b).tolist())
    return float(np.dot(a, b))


def _cauchy_recursion(problem, n_terms, step):
    """Shared driver for the sin-power and Taylor recursions.

    ``step(n, c_n, conv)`` returns the coefficient of index ``n + 2`` given the
    force coefficient ``conv = B c[n] + C (c*c)[n] + D (c*c*c)[n]`` (plus ``A``
    when ``n == 0``).
    """
    n_terms = int(n_terms)
    if n_terms < 2:
        raise ValueError(f"n_terms must be >= 2, got {n_terms}")
    B, C, D = problem.B, problem.C, problem.D
    exact = n_terms > COMPENSATED_THRESHOLD
    c = np.zeros(n_terms + 1)
    sq = np.zeros(n_terms + 1)  # (c*c)[n]
    cube = np.zeros(n_terms + 1)  # (c*c*c)[n]
    c[0] = problem.v0
    for n in range(0, n_terms - 1):
        # c[n] is final here; the convolutions at index n only touch c[0..n]
        sq[n] = _dot(c[: n + 1], c[n::-1], exact)
        if D != 0.0:
            cube[n] = _dot(sq[: n + 1], c[n::-1], exact)
        if n == 0:
            force = problem.initial_force()
        else:
            force = B * c[n] + C * sq[n] + D * cube[n]
        with np.errstate(over="ignore", invalid="ignore"):
            value = step(n, c[n], force)
        if not math.isfinite(value):
            raise NonFinite(f"coefficient {n + 2} is not finite", index=n + 2)
        c[n + 2] = value
    return c


def compute_sin_coefficients(problem, omega_series, n_terms):
    """Coefficients ``c_0 .. c_N`` of the sin-power series at frequency ``omega_series``."""
    omega_series = float(omega_series)
    if not omega_series > 0:
        raise ValueError(f"omega_series must be positive, got {omega_series}")
    inv_w2 = 1.0 / omega_series**2

    def step(n, cn, force):
        return (n * n * cn + force * inv_w2) / ((n + 1) * (n + 2))

    coeffs = _cauchy_recursion(problem, n_terms, step)
    return SinPowerSeries(omega_series=omega_series, coeffs=coeffs, problem=problem)


def _horner(coeffs, x):
    acc = np.zeros_like(x) if isinstance(x, np.ndarray) else 0.0
    for cn in coeffs[::-1]:
        acc = acc * x + cn
    return acc


def evaluate_sin_series(series, t):
    """Value of the truncated series at time ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float) if not np.isscalar(t) else float(t)
    s = np.sin(series.omega_series * t)
    return _horner(series.coeffs, s)


def ode_residual(series, t):
    """``v'' - (A + B v + C v^2 + D v^3)`` with ``v''`` taken from the ansatz."""
    t = np.asarray(t, dtype=float) if not np.isscalar(t) else float(t)
    s = np.sin(series.omega_series * t)
    c = series.coeffs
    n = np.arange(len(c))
    d1 = (n * c)[1:]
    d2 = (n * (n - 1) * c)[2:]
    v = _horner(c, s)
    p1 = _horner(d1, s)
    p2 = _horner(d2, s) if len(d2) else 0.0 * s
    vpp = series.omega_series**2 * ((1.0 - s * s) * p2 - s * p1)
    return vpp - series.problem.force(v)


def quarter_period_sums(series):
    """``(sum c_n, sum n c_n)``: the series and its ``s``-derivative at ``s = 1``."""
    c = series.coeffs
    n = np.arange(len(c))
    return math.fsum(c), math.fsum(n * c)
