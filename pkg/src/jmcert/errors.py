"""Exception types shared across the package."""


class JmcertError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(JmcertError, ValueError):
    """Malformed or out-of-range input data."""


class CompletePositivityError(ValidationError):
    """Channel data that fails the complete-positivity test.

    Carries the eigenvalue report of the violated matrix condition so the
    caller can inspect the witness vector.
    """

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class OrderingRangeError(ValidationError):
    """Ordering parameter outside the convergence range of a closed form."""


class ConvergenceError(JmcertError, RuntimeError):
    """Numerical quadrature or series failed its accuracy guards."""
