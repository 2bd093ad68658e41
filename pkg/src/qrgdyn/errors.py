"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` for bad input or an
ill-posed request, and ``NumericalError`` for overflow and oracle breaches.
The CLI maps them to exit codes 1 and 2.
"""


class QRGError(Exception):
    """Base class for all package errors."""


class ValidationError(QRGError, ValueError):
    pass


class NumericalError(QRGError, ArithmeticError):
    pass


class FlowOverflowError(NumericalError, OverflowError):
    """The RG flow left the range of double precision (g_n = g**(2**n) for g > 1)."""


class InvalidStateError(ValidationError):
    """A matrix violates the density-matrix invariants beyond tolerance."""


class UnderResolvedGridError(ValidationError):
    pass


class InsufficientPeaksError(ValidationError):
    pass


class InsufficientSamplesError(ValidationError):
    pass


class BoundaryMinimumError(ValidationError):
    pass


class NoOverlapError(ValidationError):
    pass


class PatternMatchError(NumericalError):
    """Projected Hamiltonian is not of transverse-field Ising form."""
