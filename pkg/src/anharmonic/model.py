"""Oscillator problems in the general form ``v'' = A + B v + C v^2 + D v^3``.

The two concrete oscillators are

* quadratic: ``u'' + omega^2 u = -beta u^2``, shifted by ``u = v - omega^2/(2 beta)``
  into ``v'' + beta v^2 = omega^4/(4 beta)``;
* cubic: ``u'' + omega^2 u = -beta u^3``, normalized by ``u = a0 v`` and
  ``t = omega x`` into ``v'' + v + beta_n v^3 = 0`` with
  ``beta_n = beta a0^2 / omega^2``.

Initial velocity is always zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from anharmonic._io import dumps
from anharmonic.errors import DegenerateProblem

LABELS = ("raw", "shifted-quadratic", "cubic", "normalized-cubic")


@dataclass(frozen=True)
class ShiftRecord:
    """Affine map back to the original amplitude: ``u = scale * v - offset``.

    ``time_scale`` converts normalized time into physical time
    (``t_physical = t / time_scale``).
    """

    offset: float = 0.0
    scale: float = 1.0
    time_scale: float = 1.0

    def to_dict(self):
        return {"offset": self.offset, "scale": self.scale, "time_scale": self.time_scale}


@dataclass(frozen=True)
class GeneralProblem:
    """Autonomous oscillator ``v'' = A + B v + C v^2 + D v^3``, ``v(0) = v0``, ``v'(0) = 0``."""

    A: float
    B: float
    C: float
    D: float
    v0: float
    label: str = "raw"
    shift: ShiftRecord | None = None
    # v''(0) computed before the shift, when that is more accurate than force(v0)
    accel0: float | None = None

    def __post_init__(self):
        for name in ("A", "B", "C", "D", "v0"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DegenerateProblem(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.A == 0 and self.B == 0 and self.C == 0 and self.D == 0:
            raise DegenerateProblem("all force coefficients vanish")
        if self.accel0 is not None:
            accel0 = float(self.accel0)
            if not math.isfinite(accel0):
                raise DegenerateProblem(f"accel0 must be finite, got {accel0}")
            object.__setattr__(self, "accel0", accel0)

    def force(self, v):
        """Right-hand side ``A + B v + C v^2 + D v^3`` (Horner)."""
        return self.A + v * (self.B + v * (self.C + v * self.D))

    def initial_force(self):
        """``v''(0)``: ``accel0`` when given, else ``force(v0)``."""
        return self.force(self.v0) if self.accel0 is None else self.accel0

    def force_derivative(self, v):
        return self.B + v * (2.0 * self.C + 3.0 * self.D * v)

    def to_dict(self):
        shift = self.shift or ShiftRecord()
        return {
            "A": self.A,
            "B": self.B,
            "C": self.C,
            "D": self.D,
            "v0": self.v0,
            "label": self.label,
            "shift": shift.to_dict(),
            **({} if self.accel0 is None else {"accel0": self.accel0}),
        }

    def to_json(self):
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        shift = data.get("shift")
        return cls(
            A=data["A"],
            B=data["B"],
            C=data["C"],
            D=data["D"],
            v0=data["v0"],
            label=data.get("label", "raw"),
            shift=ShiftRecord(**shift) if shift else None,
            accel0=data.get("accel0"),
        )


def make_quadratic_shifted(omega, beta, a0):
    """Shifted form of ``u'' + omega^2 u = -beta u^2``, ``u(0) = a0``.

    Returns the problem in ``v = u + omega^2/(2 beta)`` together with the
    shift needed to map ``v`` back to ``u``.
    """
    omega, beta, a0 = float(omega), float(beta), float(a0)
    if beta == 0:
        raise DegenerateProblem("beta = 0 makes the shift omega^2/(2 beta) singular; use make_raw")
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    # offset and A are built so that a0 = -omega**2/beta gives v0 = -offset
    # and force(v0) == 0 exactly in floating point
    ratio = omega**2 / beta
    offset = ratio * 0.5
    shift = ShiftRecord(offset=offset, scale=1.0, time_scale=1.0)
    problem = GeneralProblem(
        A=(beta * offset) * offset,
        B=0.0,
        C=-beta,
        D=0.0,
        v0=a0 + offset,
        label="shifted-quadratic",
        shift=shift,
        # -omega^2 a0 - beta a0^2 from the unshifted data: forming v0 first
        # loses the digits of a0 below the offset
        accel0=-beta * a0 * (a0 + ratio),
    )
    return problem, shift


def make_raw(omega, beta2, beta3, a0):
    """``v'' = -omega^2 v - beta2 v^2 - beta3 v^3`` with ``v(0) = a0``."""
    omega = float(omega)
    if omega < 0:
        raise ValueError(f"omega must be non-negative, got {omega}")
    if omega == 0 and beta2 == 0 and beta3 == 0:
        raise DegenerateProblem("omega, beta2 and beta3 all vanish")
    label = "cubic" if beta2 == 0 and beta3 != 0 else "raw"
    return GeneralProblem(A=0.0, B=-omega**2, C=-float(beta2), D=-float(beta3), v0=a0, label=label)


def make_cubic_normalized(omega, beta, a0):
    """Normalized form of ``u'' + omega^2 u = -beta u^3``, ``u(0) = a0``.

    With ``u = a0 v`` and ``t = omega x`` this becomes
    ``v'' + v + beta_n v^3 = 0``, ``v(0) = 1``, where
    ``beta_n = beta a0^2 / omega^2``.
    """
    omega, beta, a0 = float(omega), float(beta), float(a0)
    if a0 == 0:
        raise DegenerateProblem("a0 = 0 has no normalization")
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    beta_n = beta * a0**2 / omega**2
    shift = ShiftRecord(offset=0.0, scale=a0, time_scale=omega)
    problem = GeneralProblem(A=0.0, B=-1.0, C=0.0, D=-beta_n, v0=1.0, label="normalized-cubic", shift=shift)
    return problem, shift


def unshift(value, shift):
    """Map a value of the transformed variable back to the original amplitude."""
    if shift is None:
        return value
    return shift.scale * value - shift.offset
