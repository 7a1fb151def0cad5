"""Numerical checks of the convergence and decay claims for sin-power
coefficients.

Scans over index grids replace computer-algebra monotonicity arguments;
a scan is evidence on a finite grid, not a proof, and every scan reports
the exact indices where it fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from anharmonic._io import dumps
from anharmonic.errors import AllZero, WrongForm
from anharmonic.sin_series import quarter_period_sums

# coefficients below this fraction of max|c| are round-off, not signal
ROUNDOFF_FLOOR = 1e-11
MIN_FIT_POINTS = 16
MIN_RESOLVED = 3
CUBIC_SCAN_RANGE = (3, 10_000)
PROOF_SCAN_MAX = 10_000


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    residual: float
    n_terms: int

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "residual": self.residual, "n_terms": self.n_terms}


@dataclass
class DecayReport:
    alpha_fit: float
    k_fit: float
    geometric_ratio: float
    power_rss: float
    geometric_rss: float
    better_model: str
    bound_holds: dict = field(default_factory=dict)
    worst_index: int | None = None

    def to_dict(self):
        return {
            "alpha_fit": self.alpha_fit,
            "k_fit": self.k_fit,
            "R_fit": self.geometric_ratio,
            "power_rss": self.power_rss,
            "geometric_rss": self.geometric_rss,
            "better_model": self.better_model,
            "bound": [
                {"epsilon": eps, "k": k, "holds": holds} for (eps, k), holds in self.bound_holds.items()
            ],
            "worst_index": self.worst_index,
        }


@dataclass
class ScanResult:
    name: str
    grid: list
    violations: list

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {"name": self.name, "grid": self.grid, "violations": self.violations}


def report_json(positivity, identity, decay, scans):
    return dumps(
        {
            "positivity": positivity,
            "identity": None if identity is None else identity.to_dict(),
            "decay": None if decay is None else decay.to_dict(),
            "scans": [s.to_dict() for s in scans],
        }
    )


# --- convergence: positivity and the quarter-period identity ---------------


def check_positivity(series):
    """True iff every computed coefficient is non-negative."""
    return bool(np.all(np.asarray(series.coeffs) >= 0))


def partial_sums(series):
    return np.cumsum(series.coeffs)


def check_sum_identity(series):
    """Compare ``-beta S^2 + Omega^2 M`` with ``-beta c0^2 - 2 Omega^2 c2``.

    ``S = sum c_n`` and ``M = sum n c_n`` are the series and its
    ``s``-derivative at ``s = 1``; both sides equal ``-A`` when the
    ODE holds at the quarter period.
    """
    p = series.problem
    if p.B != 0 or p.D != 0:
        raise WrongForm("identity applies to v'' = A + C v^2 only (B = D = 0)")
    beta = -p.C
    w2 = series.omega_series**2
    S, M = quarter_period_sums(series)
    c = series.coeffs
    lhs = -beta * S * S + w2 * M
    rhs = -beta * c[0] ** 2 - 2.0 * w2 * c[2]
    return IdentityReport(float(lhs), float(rhs), float(abs(lhs - rhs)), series.n_terms)


# --- decay ------------------------------------------------------------------


def _resolved_tail(coeffs):
    """Even indices in the upper half of the resolved range.

    The resolved range stops at the first even coefficient below
    ``ROUNDOFF_FLOOR * max|c|``; beyond it the recursion only carries
    round-off.
    """
    c = np.abs(np.asarray(coeffs, dtype=float))
    floor = ROUNDOFF_FLOOR * c.max()
    even = np.arange(2, len(c), 2)
    below = np.flatnonzero(c[even] <= floor)
    top = len(even) if len(below) == 0 else below[0]
    if top < MIN_RESOLVED:
        raise AllZero(f"only {top} even coefficients above the round-off floor")
    resolved = even[:top]
    tail = resolved[resolved >= resolved[-1] // 2]
    return tail, c[tail]


def fit_decay(series, bounds=()):
    """Least-squares fits of the coefficient tail to ``k n^-alpha`` and ``R^n``.

    ``bounds`` is an iterable of ``(epsilon, k)`` pairs checked pointwise
    with :func:`check_lemma2_bound`.
    """
    c = np.asarray(series.coeffs, dtype=float)
    nonzero_even = np.count_nonzero(c[2::2])
    if nonzero_even == 0:
        raise AllZero("series terminates at c0")
    if nonzero_even < MIN_FIT_POINTS:
        raise AllZero(f"series terminates: only {nonzero_even} nonzero even coefficients")
    n, mag = _resolved_tail(c)
    y = np.log(mag)
    X_pow = np.column_stack([-np.log(n), np.ones(len(n))])
    (alpha, logk), rss_p, *_ = np.linalg.lstsq(X_pow, y, rcond=None)
    X_geo = np.column_stack([n.astype(float), np.ones(len(n))])
    (logR, _), rss_g, *_ = np.linalg.lstsq(X_geo, y, rcond=None)
    rss_p = float(rss_p[0]) if len(rss_p) else 0.0
    rss_g = float(rss_g[0]) if len(rss_g) else 0.0
    report = DecayReport(
        alpha_fit=float(alpha),
        k_fit=float(math.exp(logk)),
        geometric_ratio=float(math.exp(logR)),
        power_rss=rss_p,
        geometric_rss=rss_g,
        better_model="power" if rss_p < rss_g else "geometric",
    )
    for eps, k in bounds:
        holds, worst = decay_margin(series, eps, k)
        report.bound_holds[(eps, k)] = holds
        report.worst_index = worst
    return report


def decay_margin(series, epsilon, k):
    """``(holds, worst_n)`` for ``|c_n| < k n^(-3/2 + epsilon)`` over even ``n``
    in ``[2, N]``; ``worst_n`` maximizes ``|c_n| n^(3/2 - epsilon) / k``."""
    c = np.abs(np.asarray(series.coeffs, dtype=float))
    n = np.arange(2, len(c), 2)
    if len(n) == 0:
        return True, None
    scaled = c[n] * n ** (1.5 - epsilon)
    worst = int(n[np.argmax(scaled)])
    return bool(np.all(scaled < k)), worst


def check_lemma2_bound(series, epsilon, k):
    """Pointwise ``|c_n| < k / n^(3/2 - epsilon)`` for every even ``n`` in ``[2, N]``."""
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    return decay_margin(series, epsilon, k)[0]


# --- the constants and functions of the decay proof --------------------------


def proof_functions(p, alpha, beta_over_omega2, c0):
    """``(f, g, p f g)`` with

    ``f(p) = (p+1)/p ((p-1)/(p+2))^(alpha-1)`` and
    ``g(p) = 1 - (p^2 - b c0)(p+2)^(alpha-1) / ((p+1) p^alpha)``, ``b = beta/omega^2``.

    ``g`` is evaluated as ``-expm1(log ratio)``: it is O(1/p) or smaller, and
    the direct form loses every digit by ``p ~ 1e8``.
    """
    p = np.asarray(p, dtype=float)
    b = beta_over_omega2
    f = (1.0 + 1.0 / p) * np.exp((alpha - 1.0) * (np.log1p(-1.0 / p) - np.log1p(2.0 / p)))
    with np.errstate(invalid="ignore", divide="ignore"):
        log_ratio = np.log1p(-b * c0 / p**2) + (alpha - 1.0) * np.log1p(2.0 / p) - np.log1p(1.0 / p)
    g = -np.expm1(log_ratio)
    pfg = p * f * g
    if pfg.ndim == 0:
        return float(f), float(g), float(pfg)
    return f, g, pfg


def f_lower_bound(alpha):
    return 1.5 * 4.0 ** (1.0 - alpha)


def check_lemma2_constant(epsilon, alpha, beta_over_omega2, c0, p_max=PROOF_SCAN_MAX):
    """Candidate decay constants, side by side.

    * ``statement``: ``b (3/4) eps 4^(eps - 1/2)``, with ``b = beta/omega^2``;
    * ``proof``: ``(3/2) 4^(1 - alpha) (3 - 2 alpha)`` (zero at ``alpha = 3/2``);
    * ``inductive``: ``min_p p f(p) g(p) / |b|`` over ``p`` in ``[2, p_max]``,
      the largest ``k`` that closes the induction step for these ``b``, ``c0``.

    ``ratio`` compares the two candidate forms; they are not assumed equal.
    """
    b = beta_over_omega2
    statement = b * 0.75 * epsilon * 4.0 ** (epsilon - 0.5)
    proof = max(0.0, 1.5 * 4.0 ** (1.0 - alpha) * (3.0 - 2.0 * alpha))
    inductive = math.nan
    if b != 0:
        p = np.arange(2, int(p_max) + 1, dtype=float)
        _, _, pfg = proof_functions(p, alpha, b, c0)
        inductive = max(0.0, float(np.min(pfg)) / abs(b))
    ratio = statement / proof if proof > 0 else math.inf
    return {
        "epsilon": epsilon,
        "alpha": alpha,
        "statement": statement,
        "proof": proof,
        "inductive": inductive,
        "ratio": ratio,
        "consistent": bool(proof > 0 and abs(ratio - 1.0) < 1e-12),
        "method_fails": proof == 0.0,
    }


def admissible_k(series, epsilon):
    """Decay constant used to test a computed series.

    The proof-form constant at ``alpha = 3/2 - epsilon``, carried into
    amplitude units by ``Omega^2 / |beta|`` of the series (the quadratic
    term of the induction step is the only place a scale enters). It is
    the larger of the two candidate constants, hence the most lenient.
    """
    alpha = 1.5 - epsilon
    p = series.problem
    scale = series.omega_series**2 / abs(p.C) if p.C != 0 else (
        series.omega_series**2 / abs(p.D) if p.D != 0 else 1.0)
    return check_lemma2_constant(epsilon, alpha, 1.0, 0.0)["proof"] * scale


def convolution_inequality(p, alpha):
    """``(sum_{0<r<p} 1/(r^alpha (p-r)^alpha), 1/(p-1)^(alpha-1))``."""
    p = int(p)
    if p < 2:
        raise ValueError("p must be >= 2")
    r = np.arange(1, p, dtype=float)
    lhs = math.fsum(1.0 / (r * (p - r)) ** alpha)
    rhs = (p - 1.0) ** (1.0 - alpha)
    return lhs, rhs


# equality holds exactly at p = 2 and p = 3; allow a few ulps
_INEQ_SLACK = 8 * np.finfo(float).eps


def scan_convolution(alpha, p_max=PROOF_SCAN_MAX):
    violations = []
    for p in range(2, p_max + 1):
        lhs, rhs = convolution_inequality(p, alpha)
        if lhs > rhs * (1.0 + _INEQ_SLACK):
            violations.append(p)
    return ScanResult(f"convolution alpha={alpha}", [2, p_max], violations)


def scan_f(alpha, p_max=PROOF_SCAN_MAX):
    """Where ``f`` fails to increase, or drops below ``(3/2) 4^(1-alpha)``."""
    p = np.arange(2, p_max + 1, dtype=float)
    f, _, _ = proof_functions(p, alpha, 0.0, 0.0)
    bound = f_lower_bound(alpha) * (1.0 - _INEQ_SLACK)
    not_increasing = (np.flatnonzero(np.diff(f) <= 0) + 3).tolist()
    below = p[f < bound].astype(int).tolist()
    return ScanResult(f"f alpha={alpha}", [2, p_max], sorted(set(not_increasing) | set(below)))


def scan_pfg_decreasing(alpha=1.5, bc0=1.0, p_max=1e6, points=400):
    """``p f g`` on a logarithmic grid: indices where it fails to decrease."""
    p = np.unique(np.round(np.geomspace(2, p_max, points)))
    _, _, pfg = proof_functions(p, alpha, bc0, 1.0)
    bad = p[1:][np.diff(pfg) >= 0].astype(int).tolist()
    return ScanResult(f"pfg alpha={alpha} bc0={bc0}", [2, p_max], bad), p, pfg


def scan_pg_lower(alpha, bc0, p_max=PROOF_SCAN_MAX):
    """Where ``p g(p) > 3 - 2 alpha`` fails."""
    p = np.arange(2, p_max + 1, dtype=float)
    _, g, _ = proof_functions(p, alpha, bc0, 1.0)
    bad = p[p * g <= 3.0 - 2.0 * alpha].astype(int).tolist()
    return ScanResult(f"pg alpha={alpha} bc0={bc0}", [2, p_max], bad)


# --- cubic analog -------------------------------------------------------------


def cubic_bound_terms(n, alpha, k, c0, c1):
    n = np.asarray(n, dtype=float)
    lhs = n ** (2.0 - alpha) + (k * k + 3.0 * c0 * k) / (n - 2.0) ** (alpha - 1.0) + (2.0 * c0 + 2.0 * c0 * c1) / (
        n - 1.0
    ) ** alpha
    rhs = (n + 1.0) / (n + 2.0) ** (alpha - 1.0)
    return lhs, rhs


def cubic_bound_condition(n, alpha, k, c0, c1):
    """Sufficient condition for the induction step of the cubic decay bound at index ``n``."""
    if n < 3:
        raise ValueError("n must be >= 3")
    lhs, rhs = cubic_bound_terms(n, alpha, k, c0, c1)
    return bool(lhs < rhs)


def cubic_admissible_k(alpha, c0, c1, n_range=CUBIC_SCAN_RANGE, iterations=200):
    """Largest ``k >= 0`` with the cubic condition true for every ``n`` in ``n_range``.

    The left side grows with ``k`` (for ``c0 >= 0``), so the admissible set is an
    interval ``[0, k*)``; bisection on ``k`` with a worst-``n`` inner loop.
    Returns ``(k_star, first_failing_n)``; ``k_star = 0.0`` and the first
    failing index when even ``k = 0`` is inadmissible.
    """
    n = np.arange(n_range[0], n_range[1] + 1, dtype=float)

    def worst(k):
        lhs, rhs = cubic_bound_terms(n, alpha, k, c0, c1)
        bad = np.flatnonzero(lhs >= rhs)
        return None if len(bad) == 0 else int(n[bad[0]])

    first = worst(0.0)
    if first is not None:
        return 0.0, first
    lo, hi = 0.0, 1.0
    while worst(hi) is None:
        hi *= 2.0
        if hi > 1e12:
            return math.inf, None
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if worst(mid) is None:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return lo, None


def cubic_first_admissible_n(alpha, c0, c1, n_max=CUBIC_SCAN_RANGE[1]):
    """Smallest ``n0`` such that ``k = 0`` satisfies the cubic condition on all of ``[n0, n_max]``."""
    n = np.arange(3, n_max + 1, dtype=float)
    lhs, rhs = cubic_bound_terms(n, alpha, 0.0, c0, c1)
    bad = np.flatnonzero(lhs >= rhs)
    if len(bad) == 0:
        return 3
    if bad[-1] == len(n) - 1:
        return None
    return int(n[bad[-1] + 1])
