"""Exception types shared across the package."""


class CfrateError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CfrateError, ValueError):
    """Invalid or inconsistent system configuration."""


class DomainError(CfrateError, ValueError):
    """Argument outside the mathematical domain of a special function."""


class SeriesOverflowError(CfrateError, OverflowError):
    """A series term exceeds the representable floating-point range before convergence."""


class ToleranceError(CfrateError):
    """A series or iteration stopped before reaching the requested tolerance.

    Carries the best partial result so callers can inspect how far it got.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DivergenceError(CfrateError, ArithmeticError):
    """A semi-infinite integrand does not decay, so the integral diverges."""


class ConstraintError(CfrateError, ValueError):
    """A validity constraint of the requested method is violated.

    Raised for example when the series form of the dispersion moments is
    requested for a configuration where the linear exponent term dominates
    the decay of the integrand and the defining integral would diverge.
    """


class DegenerateDispersionError(CfrateError, ValueError):
    """Block error probability is undefined because the dispersion is (numerically) zero."""


class InternalConsistencyError(CfrateError, RuntimeError):
    """Two internally computed quantities disagree beyond numerical tolerance."""


class NonHermitianError(CfrateError, ValueError):
    """The matrix handed to the Hermitian eigensolver is not Hermitian."""
