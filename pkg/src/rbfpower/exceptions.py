"""Exception types raised by the library.

The CLI maps these onto exit codes: validation problems exit with 2,
numerical failures with 3.
"""


class RBFError(Exception):
    """Base class for all library errors."""


class ValidationError(RBFError, ValueError):
    """Malformed input: bad shapes, unsupported parameters, bad files."""


class UnsupportedOrderError(ValidationError):
    """Requested derivative order is outside the supported range."""


class SmoothnessError(ValidationError):
    """Kernel is not differentiable at the requested point."""


class ExponentConditionError(ValidationError):
    """Spectral decay exponents violate ``2|mu| < s_inf`` or ``s0 < 2q``."""


class NumericalError(RBFError, ArithmeticError):
    """A numerical procedure failed."""


class UnisolvencyError(NumericalError):
    """Centers do not determine polynomials of the basis order."""


class SingularSystemError(NumericalError):
    """Saddle-point system is singular or numerically rank deficient."""

    def __init__(self, message, condition=None, separation=None):
        super().__init__(message)
        self.condition = condition
        self.separation = separation


class ConvergenceError(NumericalError):
    """Quadrature did not reach the requested tolerance."""


class NotDominatedError(NumericalError):
    """Function's spectrum is not dominated by the kernel spectrum."""


class ConditioningWarning(RuntimeWarning):
    """Saddle matrix condition number exceeds the warning threshold."""
