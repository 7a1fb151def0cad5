"""Exception hierarchy.

Every numerical failure derives from :class:`OscillatorError`; the CLI maps
these to exit code 3 and validation problems (``ValueError``) to exit code 2.
"""


class OscillatorError(Exception):
    """Base class for numerical failures."""


class DegenerateProblem(OscillatorError, ValueError):
    """Parameters make the problem or its transform singular."""


class NonFinite(OscillatorError):
    """A coefficient or state overflowed.

    ``index`` is the coefficient index (or step number) where it happened.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class Equilibrium(OscillatorError):
    """The initial value is a critical point of the potential."""


class NonPeriodic(OscillatorError):
    """The motion is not confined to a bounded potential well."""


class Separatrix(OscillatorError):
    """A turning point is a double root; the period is infinite."""


class NoConvergence(OscillatorError):
    """An iterative procedure exhausted its budget."""


class ModulusOutOfRange(OscillatorError, ValueError):
    """Elliptic modulus outside ``[0, 1)``."""


class OutOfBranch(OscillatorError, ValueError):
    """Closed form requested outside the branch where it is valid."""


class NoMinimum(OscillatorError):
    """Frequency calibration found no interior minimum."""


class StepUnderflow(OscillatorError):
    """Integrator step size collapsed below round-off."""


class NoTurning(OscillatorError):
    """The velocity never changes sign along a trajectory."""


class WrongForm(OscillatorError, ValueError):
    """Operation requires a different problem form."""


class AllZero(OscillatorError):
    """The series terminates; a decay fit is undefined."""
