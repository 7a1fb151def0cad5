import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from anharmonic import make_cubic_normalized, make_quadratic_shifted, make_raw

# (omega, beta) pairs; a0 is chosen so that beta a0 / omega^2 = x
QUADRATIC_X = (-0.3, -0.15, 0.15, 0.3)
QUADRATIC_OB = ((1.0, 1.0), (1.6, -2.0))
# normalized cubic strength beta a0^2 / omega^2
CUBIC_BN = (-0.5, -0.25, 0.25, 0.5)
CUBIC_OB = ((1.0, 1.0), (2.0, 3.0))


def standard_grid():
    """Quadratic |beta a0/omega^2| <= 0.3 and cubic |beta a0^2/omega^2| <= 0.5, endpoints included.

    The first cubic (omega, beta) pair is used in normalized form, the second
    in raw physical units.
    """
    out = []
    for omega, beta in QUADRATIC_OB:
        for x in QUADRATIC_X:
            a0 = x * omega**2 / beta
            out.append((f"quadratic w={omega} b={beta} x={x}", make_quadratic_shifted(omega, beta, a0)[0]))
    for i, (omega, beta) in enumerate(CUBIC_OB):
        for bn in CUBIC_BN:
            b = math.copysign(beta, bn)
            a0 = omega * math.sqrt(abs(bn) / beta)
            if i == 0:
                out.append((f"cubic w={omega} b={b} bn={bn}", make_cubic_normalized(omega, b, a0)[0]))
            else:
                out.append((f"raw cubic w={omega} b={b} bn={bn}", make_raw(omega, 0.0, b, a0)))
    return out


def dop853(problem, t_eval, rtol=1e-13):
    """Second, independent oracle: scipy's 8th-order Dormand-Prince."""
    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    sol = solve_ivp(
        lambda t, y: [y[1], problem.force(y[0])],
        (0.0, float(t_eval.max()) if t_eval.max() > 0 else 1e-300),
        [problem.v0, 0.0],
        method="DOP853",
        rtol=rtol,
        atol=1e-15 * max(1.0, abs(problem.v0)),
        t_eval=t_eval,
        dense_output=False,
    )
    return sol.y[0]


@pytest.fixture(scope="session")
def grid():
    return standard_grid()


# --- acceptance summary -----------------------------------------------------------

ACCEPTANCE = {}


def record(number, passed, detail):
    """Store and print the one-line verdict for an acceptance criterion."""
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
