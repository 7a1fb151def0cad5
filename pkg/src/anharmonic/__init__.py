"""Sin-power and Taylor series solutions of quadratic and cubic anharmonic
oscillators, with period computation and numerical verification tools."""

from anharmonic.errors import (
    AllZero,
    DegenerateProblem,
    Equilibrium,
    ModulusOutOfRange,
    NoConvergence,
    NoMinimum,
    NonFinite,
    NonPeriodic,
    NoTurning,
    OscillatorError,
    OutOfBranch,
    Separatrix,
    StepUnderflow,
    WrongForm,
)
from anharmonic.model import (
    GeneralProblem,
    ShiftRecord,
    make_cubic_normalized,
    make_quadratic_shifted,
    make_raw,
    unshift,
)
from anharmonic.sin_series import (
    SinPowerSeries,
    compute_sin_coefficients,
    evaluate_sin_series,
    ode_residual,
    quarter_period_sums,
)
from anharmonic.taylor_series import (
    TaylorSeries,
    compute_taylor_coefficients,
    evaluate_taylor,
    sin_series_to_taylor,
)
from anharmonic.period import (
    PeriodEstimate,
    calibrate_frequency,
    elliptic_K_agm,
    period_by_quadrature,
    period_duffing_closed_form,
    potential_energy,
    turning_points,
)
from anharmonic.oracle import Trajectory, detect_turning_points, integrate

__version__ = "0.1.0"
