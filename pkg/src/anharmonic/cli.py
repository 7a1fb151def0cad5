"""Command-line front end: ``solve``, ``period``, ``verify``, ``bounds``, ``compare``, ``sweep``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from anharmonic import diagnostics as diag
from anharmonic._io import csv_text, dumps
from anharmonic.errors import OscillatorError
from anharmonic.model import GeneralProblem, make_cubic_normalized, make_quadratic_shifted, make_raw, unshift
from anharmonic.oracle import integrate
from anharmonic.period import (
    calibrate_frequency,
    period_by_calibration,
    period_by_quadrature,
    period_duffing_closed_form,
    tail_objective,
)
from anharmonic.sin_series import compute_sin_coefficients, evaluate_sin_series, ode_residual
from anharmonic.taylor_series import compute_taylor_coefficients, evaluate_taylor

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_MAX_TERMS = 4096

# verify thresholds
TAIL_DECAY_TOL = 1e-6
IDENTITY_TOL = 1e-8
ORACLE_TOL = 1e-7
RESIDUAL_TOL = 1e-6
VERIFY_SAMPLES = 128
DECAY_EPSILON = 0.1


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    equation: str | None = None
    omega: float | None = None
    beta: float | None = None
    beta2: float = 0.0
    beta3: float = 0.0
    a0: float | None = None
    raw: dict | None = None
    terms: int | None = None
    freq_mode: str = "period"
    omega_series: float | None = None
    freq_scale: float = 1.0
    series: str = "sin"
    fmt: str = "json"
    out: str | None = None
    samples: int = 0
    samples_out: str | None = None
    method: str = "quadrature"
    tol: float = 1e-11
    seed: int = 0
    quiet: bool = False
    taylor_terms: int = 40
    sweep: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command == "bounds":
            return
        named = self.equation is not None
        if named == (self.raw is not None):
            raise UsageError("give exactly one of --equation or --raw")

    def build(self):
        """``(problem, named_omega)``; ``named_omega`` is the equation's own
        frequency in the problem's time units (``None`` for raw coefficients)."""
        if self.raw is not None:
            r = self.raw
            problem = GeneralProblem(A=r.get("A", 0.0), B=r.get("B", 0.0), C=r.get("C", 0.0), D=r.get("D", 0.0), v0=r["v0"])
            return problem, (math.sqrt(-problem.B) if problem.B < 0 else None)
        for name in ("omega", "a0"):
            if getattr(self, name) is None:
                raise UsageError(f"--{name} is required with --equation")
        if self.equation == "quadratic":
            if self.beta is None:
                raise UsageError("--beta is required for the quadratic equation")
            problem, _ = make_quadratic_shifted(self.omega, self.beta, self.a0)
            return problem, self.omega
        if self.equation == "cubic":
            if self.beta is None:
                raise UsageError("--beta is required for the cubic equation")
            problem, _ = make_cubic_normalized(self.omega, self.beta, self.a0)
            return problem, 1.0
        if self.equation == "raw":
            return make_raw(self.omega, self.beta2, self.beta3, self.a0), self.omega
        raise UsageError(f"unknown equation {self.equation!r}")


def max_terms():
    return int(os.environ.get("OSC_MAX_TERMS", DEFAULT_MAX_TERMS))


def _terms(cfg, default):
    n = default if cfg.terms is None else int(cfg.terms)
    if n < 2:
        raise UsageError("--terms must be >= 2")
    cap = max_terms()
    if n > cap:
        raise UsageError(f"--terms {n} exceeds OSC_MAX_TERMS={cap}")
    return n


def _time_scale(problem):
    return problem.shift.time_scale if problem.shift is not None else 1.0


def series_frequency(cfg, problem, named_omega):
    """Series frequency for the configured mode, in the problem's time units."""
    if cfg.omega_series is not None:
        w = float(cfg.omega_series)
    elif cfg.freq_mode == "paper":
        if named_omega is None or named_omega <= 0:
            raise UsageError("--freq paper needs a positive equation omega")
        w = named_omega
    elif cfg.freq_mode == "period":
        w = period_by_quadrature(problem).omega_pi_over_T
    elif cfg.freq_mode == "calibrated":
        w = calibrate_frequency(problem)
    else:
        raise UsageError(f"unknown frequency mode {cfg.freq_mode!r}")
    if not w > 0:
        raise UsageError("series frequency must be positive")
    return w * cfg.freq_scale


def _emit(text, path):
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# --- commands --------------------------------------------------------------------


def cmd_solve(cfg):
    problem, named_omega = cfg.build()
    n = _terms(cfg, 64)
    if cfg.series == "taylor":
        series = compute_taylor_coefficients(problem, n)
        evaluate = lambda t: evaluate_taylor(series, t)  # noqa: E731
    else:
        w = series_frequency(cfg, problem, named_omega)
        series = compute_sin_coefficients(problem, w, n)
        evaluate = lambda t: evaluate_sin_series(series, t)  # noqa: E731
    payload = series.to_dict()
    sample_rows = None
    if cfg.samples:
        if cfg.series == "taylor":
            t_end = 0.5 * series.radius_estimate() if math.isfinite(series.radius_estimate()) else 1.0
        else:
            t_end = math.pi / series.omega_series
        t = np.linspace(0.0, t_end, int(cfg.samples))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            v = evaluate(t)
        u = unshift(v, problem.shift)
        sample_rows = list(zip(t, v, u))
    if cfg.fmt == "csv":
        _emit(series.to_csv(), cfg.out)
    else:
        if sample_rows is not None and not (cfg.samples_out or cfg.out):
            payload["samples"] = {"t": [r[0] for r in sample_rows], "v": [r[1] for r in sample_rows], "u": [r[2] for r in sample_rows]}
        _emit(dumps(payload), cfg.out)
    if sample_rows is not None and (cfg.samples_out or cfg.out):
        path = cfg.samples_out or os.path.splitext(cfg.out)[0] + ".samples.csv"
        _emit(csv_text(["t", "v", "u"], sample_rows), path)
    return EXIT_OK


def cmd_period(cfg):
    problem, _ = cfg.build()
    scale = _time_scale(problem)
    if cfg.method == "quadrature":
        est = period_by_quadrature(problem).rescaled(scale)
    elif cfg.method == "closed-form":
        if cfg.equation != "cubic":
            raise UsageError("closed form is available for --equation cubic only")
        est = period_duffing_closed_form(cfg.omega, cfg.beta, cfg.a0)
        # turning points in the normalized variable, like the other methods
        est = replace(est, x_minus=-1.0, x_plus=1.0)
    elif cfg.method == "calibrated":
        est = period_by_calibration(problem, _terms(cfg, 256)).rescaled(scale)
    else:
        raise UsageError(f"unknown method {cfg.method!r}")
    _emit(est.to_json(), cfg.out)
    return EXIT_OK


def _check(name, passed, gating=True, **numbers):
    return {"name": name, "pass": None if passed is None else bool(passed), "gating": gating, **numbers}


def verify_problem(cfg):
    """Run every applicable check; returns ``(report_dict, all_gating_passed)``."""
    problem, named_omega = cfg.build()
    n = _terms(cfg, 128)
    w = series_frequency(cfg, problem, named_omega)
    series = compute_sin_coefficients(problem, w, n)
    c = series.coeffs
    checks = []
    scans = []

    checks.append(_check("parity", bool(np.all(c[1::2] == 0))))

    premise = problem.B == 0 and problem.D == 0 and problem.C > 0 and c[0] > 0 and c[2] > 0
    positivity = diag.check_positivity(series)
    checks.append(_check("positivity", positivity if premise else None, gating=premise, premise=premise))

    identity = None
    if problem.B == 0 and problem.D == 0:
        identity = diag.check_sum_identity(series)
        checks.append(_check("identity", identity.residual <= IDENTITY_TOL, residual=identity.residual, tol=IDENTITY_TOL))

    scale = float(np.max(np.abs(c))) or 1.0
    tail = tail_objective(problem, w, n) / scale
    checks.append(_check("tail_decay", tail <= TAIL_DECAY_TOL, value=tail, tol=TAIL_DECAY_TOL))

    decay = None
    k = diag.admissible_k(series, DECAY_EPSILON)
    try:
        decay = diag.fit_decay(series, bounds=[(DECAY_EPSILON, k)])
    except OscillatorError as exc:
        checks.append(_check("decay_fit", None, gating=False, note=str(exc)))
    holds, worst = diag.decay_margin(series, DECAY_EPSILON, k)
    # the candidate constant does not scale with amplitude; reported only
    checks.append(_check("decay_bound", holds, gating=False, epsilon=DECAY_EPSILON, k=k, worst_index=worst))

    try:
        est = period_by_quadrature(problem)
    except OscillatorError as exc:
        checks.append(_check("oracle", None, gating=False, note=f"no period: {type(exc).__name__}"))
    else:
        checks.append(_check("frequency_gap", None, gating=False, omega_series=w, pi_over_T=est.omega_pi_over_T,
                             gap=abs(w - est.omega_pi_over_T)))
        traj = integrate(problem, est.T, tol=cfg.tol, samples=VERIFY_SAMPLES)
        with np.errstate(over="ignore", invalid="ignore"):
            err = np.abs(evaluate_sin_series(series, traj.times) - traj.values)
            resid = np.abs(ode_residual(series, traj.times))
        max_err = float(np.max(err)) if np.all(np.isfinite(err)) else math.inf
        max_res = float(np.max(resid)) if np.all(np.isfinite(resid)) else math.inf
        checks.append(_check("oracle", max_err <= ORACLE_TOL, max_error=max_err, tol=ORACLE_TOL))
        checks.append(_check("ode_residual", max_res <= RESIDUAL_TOL, max_residual=max_res, tol=RESIDUAL_TOL))
        rng = np.random.default_rng(cfg.seed)
        t_rand = np.sort(rng.uniform(0.0, est.T, 8))
        traj_r = [integrate(problem, t, tol=cfg.tol, samples=2).values[-1] for t in t_rand]
        with np.errstate(over="ignore", invalid="ignore"):
            err_r = float(np.max(np.abs(evaluate_sin_series(series, t_rand) - np.array(traj_r))))
        checks.append(_check("oracle_random_times", err_r <= ORACLE_TOL, max_error=err_r, seed=cfg.seed))

    ok = all(ch["pass"] for ch in checks if ch["gating"])
    report = {
        "positivity": positivity,
        "identity": None if identity is None else identity.to_dict(),
        "decay": None if decay is None else decay.to_dict(),
        "checks": checks,
        "scans": [s.to_dict() for s in scans],
        "omega_series": w,
        "n_terms": n,
        "passed": ok,
    }
    return report, ok


def cmd_verify(cfg):
    report, ok = verify_problem(cfg)
    _emit(dumps(report), cfg.out)
    if not cfg.quiet:
        for ch in report["checks"]:
            status = {True: "PASS", False: "FAIL", None: "n/a "}[ch["pass"]]
            print(f"{status} {ch['name']}{'' if ch['gating'] else ' (info)'}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_bounds(cfg):
    """Numerical scans of the decay-proof inequalities; exit 1 if any scan has a violation."""
    spec = cfg.bounds
    p_max = int(spec.get("p_max", diag.PROOF_SCAN_MAX))
    scans = []
    for alpha in spec.get("alphas", [1.1, 1.25, 1.4, 1.5]):
        scans.append(diag.scan_convolution(alpha, p_max))
        scans.append(diag.scan_f(alpha, p_max))
    for bc0 in spec.get("bc0", [1.0]):
        scans.append(diag.scan_pfg_decreasing(1.5, bc0)[0])
        scans.append(diag.scan_pg_lower(spec.get("pg_alpha", 1.4), bc0, p_max))
    cubic = []
    for alpha in spec.get("cubic_alphas", [1.4, 1.6]):
        k, first = diag.cubic_admissible_k(alpha, 1.0, 0.0)
        cubic.append({"alpha": alpha, "c0": 1.0, "c1": 0.0, "k": k, "first_failing_n": first,
                      "first_admissible_n": diag.cubic_first_admissible_n(alpha, 1.0, 0.0)})
    report = {"scans": [sc.to_dict() for sc in scans], "cubic": cubic}
    _emit(dumps(report), cfg.out)
    if not cfg.quiet:
        for sc in scans:
            print(f"{'PASS' if sc.ok else 'FAIL'} {sc.name} ({len(sc.violations)} violations)", file=sys.stderr)
    return EXIT_OK if all(sc.ok for sc in scans) else EXIT_FAILED


def cmd_compare(cfg):
    problem, named_omega = cfg.build()
    n = _terms(cfg, 64)
    w = series_frequency(cfg, problem, named_omega)
    sin_series = compute_sin_coefficients(problem, w, n)
    taylor = compute_taylor_coefficients(problem, cfg.taylor_terms)
    T = period_by_quadrature(problem).T
    samples = cfg.samples or 64
    traj = integrate(problem, T, tol=cfg.tol, samples=samples)
    with warnings.catch_warnings(), np.errstate(over="ignore", invalid="ignore"):
        warnings.simplefilter("ignore", RuntimeWarning)
        sv = evaluate_sin_series(sin_series, traj.times)
        tv = evaluate_taylor(taylor, traj.times)
    se = np.abs(sv - traj.values)
    te = np.abs(tv - traj.values)
    rows = [(t, a, b, o, e1, e2) for t, a, b, o, e1, e2 in zip(traj.times, sv, tv, traj.values, se, te)]
    rows.append(("max", None, None, None, float(np.max(se)), float(np.max(te))))
    _emit(csv_text(["t", "series_value", "taylor_value", "oracle_value", "sin_err", "taylor_err"], rows), cfg.out)
    return EXIT_OK


SWEEP_PARAMS = ("a0", "beta", "omega", "beta2", "beta3")


def _sweep_row(cfg, value):
    row_cfg = replace(cfg, **{cfg.sweep["param"]: value})
    row = {"parameter": value, "T": None, "Omega": None, "alpha_fit": None, "max_residual": None, "error": ""}
    try:
        problem, _ = row_cfg.build()
        est = period_by_quadrature(problem)
        w = calibrate_frequency(problem)
        series = compute_sin_coefficients(problem, w, _terms(cfg, 64))
        row["T"] = est.T / _time_scale(problem)
        row["Omega"] = w * _time_scale(problem)
        try:
            row["alpha_fit"] = diag.fit_decay(series).alpha_fit
        except OscillatorError:
            row["alpha_fit"] = math.inf
        t = np.linspace(0.0, est.T, 129)
        row["max_residual"] = float(np.max(np.abs(ode_residual(series, t))))
    except (OscillatorError, ValueError) as exc:
        row["error"] = type(exc).__name__
    return row


def cmd_sweep(cfg):
    spec = cfg.sweep
    if spec.get("param") not in SWEEP_PARAMS:
        raise UsageError(f"--param must be one of {SWEEP_PARAMS}")
    steps = int(spec["steps"])
    if steps < 1:
        raise UsageError("--steps must be >= 1")
    grid = np.linspace(spec["start"], spec["stop"], steps)
    rows = [_sweep_row(cfg, float(v)) for v in grid]
    header = ["parameter", "T", "Omega", "alpha_fit", "max_residual", "error"]
    _emit(csv_text(header, [[r[h] for h in header] for r in rows]), cfg.out)
    return EXIT_OK if any(not r["error"] for r in rows) else EXIT_NUMERIC


COMMANDS = {
    "solve": cmd_solve,
    "period": cmd_period,
    "verify": cmd_verify,
    "bounds": cmd_bounds,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


# --- argument parsing ------------------------------------------------------------


def _add_problem_args(p):
    p.add_argument("--equation", choices=["quadratic", "cubic", "raw"])
    p.add_argument("--omega", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--beta2", type=float, default=0.0)
    p.add_argument("--beta3", type=float, default=0.0)
    p.add_argument("--a0", type=float)
    p.add_argument("--raw", action="store_true", help="give the force coefficients A, B, C, D and v0 directly")
    for name in ("A", "B", "C", "D"):
        p.add_argument(f"--{name}", type=float, default=0.0, dest=f"raw_{name}")
    p.add_argument("--v0", type=float)
    p.add_argument("--terms", type=int)
    p.add_argument("--freq", choices=["paper", "period", "calibrated"], default="period", dest="freq_mode")
    p.add_argument("--omega-series", type=float, help="explicit series frequency (overrides --freq)")
    p.add_argument("--freq-scale", type=float, default=1.0, help="multiply the chosen series frequency")
    p.add_argument("--format", choices=["json", "csv"], default="json", dest="fmt")
    p.add_argument("--out")
    p.add_argument("--config", help="JSON file with RunConfig fields; flags given explicitly win")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-11, help="oracle integrator tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--quiet", action="store_true")
    parser = argparse.ArgumentParser(prog="anharmonic", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="series coefficients")
    _add_problem_args(p)
    p.add_argument("--series", choices=["sin", "taylor"], default="sin")
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--samples-out")

    p = sub.add_parser("period", parents=[common], help="period of the oscillation")
    _add_problem_args(p)
    p.add_argument("--method", choices=["quadrature", "closed-form", "calibrated"], default="quadrature")

    p = sub.add_parser("verify", parents=[common], help="run the check suite; exit 1 on failure")
    _add_problem_args(p)

    p = sub.add_parser("bounds", parents=[common], help="scan the decay-proof inequalities")
    p.add_argument("--alpha", type=float, action="append", dest="alphas", help="repeatable; default 1.1 1.25 1.4 1.5")
    p.add_argument("--bc0", type=float, action="append", help="beta c0 / omega^2 values; repeatable; default 1")
    p.add_argument("--p-max", type=int, default=10_000)
    p.add_argument("--out")

    p = sub.add_parser("compare", parents=[common], help="series vs oracle error table")
    _add_problem_args(p)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--taylor-terms", type=int, default=40)

    p = sub.add_parser("sweep", parents=[common], help="sweep one parameter")
    _add_problem_args(p)
    p.add_argument("--param", required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--steps", type=int, default=10)
    return parser


_CONFIG_KEYS = {f.name for f in RunConfig.__dataclass_fields__.values()}


def config_from_args(args, argv):
    if args.command == "bounds":
        bounds = {"p_max": args.p_max}
        if args.alphas:
            bounds["alphas"] = args.alphas
        if args.bc0:
            bounds["bc0"] = args.bc0
        return RunConfig(command="bounds", out=args.out, quiet=args.quiet, bounds=bounds)
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            values.update(json.load(fh))
        unknown = set(values) - _CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    given = {a.split("=")[0] for a in argv if a.startswith("--")}

    def take(key, value, flag):
        if flag in given or key not in values:
            values[key] = value

    for key in ("equation", "omega", "beta", "beta2", "beta3", "a0", "terms", "freq_mode", "omega_series",
                "freq_scale", "fmt", "out", "tol", "seed", "quiet"):
        flag = {"freq_mode": "--freq", "fmt": "--format"}.get(key, "--" + key.replace("_", "-"))
        take(key, getattr(args, key), flag)
    for key in ("series", "samples", "samples_out", "method", "taylor_terms"):
        if hasattr(args, key):
            take(key, getattr(args, key), "--" + key.replace("_", "-"))
    if args.raw:
        if args.v0 is None:
            raise UsageError("--raw needs --v0")
        values["raw"] = {k: getattr(args, f"raw_{k}") for k in "ABCD"} | {"v0": args.v0}
        values["equation"] = None
    if args.command == "sweep":
        values["sweep"] = {"param": args.param, "start": args.start, "stop": args.stop, "steps": args.steps}
    return RunConfig(command=args.command, **values)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args, argv)
        return COMMANDS[cfg.command](cfg)
    except OscillatorError as exc:
        code = EXIT_USAGE if isinstance(exc, ValueError) else EXIT_NUMERIC
        index = getattr(exc, "index", None)
        err = {"error": type(exc).__name__, "message": str(exc)}
        if index is not None:
            err["index"] = index
        print(json.dumps(err), file=sys.stderr)
        return code
    except ValueError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
