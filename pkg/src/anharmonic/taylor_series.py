"""Taylor series ``v(t) = sum_k b_k t^k`` of the same problems, and the
conversion of a sin-power series into Taylor form."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from anharmonic._io import csv_text, dumps
from anharmonic.model import GeneralProblem
from anharmonic.sin_series import _cauchy_recursion, _horner


@dataclass(frozen=True, eq=False)
class TaylorSeries:
    coeffs: np.ndarray
    problem: GeneralProblem

    @property
    def n_terms(self):
        return len(self.coeffs) - 1

    def radius_estimate(self):
        """Median of ``|b_2k / b_2k+2|^(1/2)`` over the upper half of the even
        coefficients; ``inf`` when the series terminates."""
        even = np.abs(self.coeffs[::2])
        k = np.arange(len(even) - 1)
        tail = k[k >= len(k) // 2]
        ratios = [math.sqrt(even[i] / even[i + 1]) for i in tail if even[i] > 0 and even[i + 1] > 0]
        if not ratios:
            return math.inf
        return float(np.median(ratios))

    def to_dict(self):
        return {
            "type": "taylor",
            "coefficients": [float(b) for b in self.coeffs],
            "n_terms": self.n_terms,
            "problem": self.problem.to_dict(),
        }

    def to_json(self):
        return dumps(self.to_dict())

    def to_csv(self):
        return csv_text(["index", "coefficient"], [(i, float(b)) for i, b in enumerate(self.coeffs)])

    @classmethod
    def from_dict(cls, data):
        return cls(coeffs=np.asarray(data["coefficients"], dtype=float), problem=GeneralProblem.from_dict(data["problem"]))


# truncated power-series arithmetic on coefficient arrays (constant term first)


def ps_add(a, b, order):
    out = np.zeros(order + 1)
    out[: min(len(a), order + 1)] += a[: order + 1]
    out[: min(len(b), order + 1)] += b[: order + 1]
    return out


def ps_mul(a, b, order):
    return np.convolve(a[: order + 1], b[: order + 1])[: order + 1]


def ps_pow(a, m, order):
    out = np.zeros(order + 1)
    out[0] = 1.0
    for _ in range(m):
        out = ps_mul(out, a, order)
    return out


def sin_squared_series(omega, order):
    """Taylor coefficients of ``sin(omega t)^2 = (1 - cos(2 omega t)) / 2``."""
    w = np.zeros(order + 1)
    # term_k = (-1)^k (2 omega)^(2k) / (2 (2k)!); w[2k] = -term_k
    term = 0.5
    for k in range(1, order // 2 + 1):
        term *= -((2.0 * omega) ** 2) / ((2 * k - 1) * (2 * k))
        w[2 * k] = -term
    return w


def compute_taylor_coefficients(problem, n_terms):
    """``b_0 .. b_M`` from ``(k+1)(k+2) b[k+2] = A [k=0] + B b[k] + C (b*b)[k] + D (b*b*b)[k]``."""

    def step(k, bk, force):
        return force / ((k + 1) * (k + 2))

    return TaylorSeries(coeffs=_cauchy_recursion(problem, n_terms, step), problem=problem)


def sin_series_to_taylor(series, n_terms):
    """Re-expand ``sum c_2m sin(Omega t)^(2m)`` as a Taylor series in ``t``
    through order ``n_terms``."""
    c = np.asarray(series.coeffs, dtype=float)
    if np.any(c[1::2] != 0):
        raise ValueError("sin-power series has nonzero odd coefficients")
    order = int(n_terms)
    w = sin_squared_series(series.omega_series, order)
    # w^m starts at t^(2m); higher m cannot reach order
    even = c[::2][: order // 2 + 1]
    acc = np.zeros(order + 1)
    for cm in even[::-1]:
        acc = ps_mul(acc, w, order)
        acc[0] += cm
    return TaylorSeries(coeffs=acc, problem=series.problem)


def evaluate_taylor(series, t):
    """Horner evaluation; warns past the estimated convergence radius."""
    tmax = np.max(np.abs(t))
    radius = series.radius_estimate()
    if tmax > radius:
        warnings.warn(f"|t| = {tmax:g} exceeds estimated convergence radius {radius:g}", RuntimeWarning, stacklevel=2)
    t = np.asarray(t, dtype=float) if not np.isscalar(t) else float(t)
    return _horner(series.coeffs, t)
