"""Exception hierarchy shared by every module."""

from __future__ import annotations


class DetKernelError(Exception):
    """Base class for all library errors."""


class MathematicalMismatch(DetKernelError):
    """Two independent computations of the same quantity disagree."""


class PoleError(DetKernelError, ValueError):
    """Gamma evaluated at a non-positive integer.

    Attributes
    ----------
    integer : int
        The pole location.
    """

    def __init__(self, integer: int, message: str | None = None):
        self.integer = int(integer)
        super().__init__(message or f"Gamma has a pole at {self.integer}")


class PrefactorPole(PoleError):
    """The Gamma prefactor of a closed-form coefficient is singular."""


class EmptyEnumeration(DetKernelError, ValueError):
    pass


class InvalidSignature(DetKernelError, ValueError):
    pass


class InternalError(DetKernelError):
    pass


class DegenerateTorusPoint(DetKernelError, ValueError):
    pass


class DimensionMismatch(DetKernelError, ValueError):
    pass


class NearSingularDenominator(DetKernelError, ValueError):
    pass


class SingularKernelPoint(DetKernelError, ValueError):
    pass


class NonUnitaryInput(DetKernelError, ValueError):
    pass


class IllConditionedDenominator(DetKernelError, ValueError):
    pass


class MixedFamily(DetKernelError, ValueError):
    pass


class PoleLine(DetKernelError, ValueError):
    pass


class AnalyticEmpiricalMismatch(MathematicalMismatch):
    pass


class NonConstantResidue(MathematicalMismatch):
    pass


class CalibrationError(DetKernelError):
    pass
