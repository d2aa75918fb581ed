"""Exception hierarchy shared by all fieldline modules."""


class FieldlineError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(FieldlineError, ValueError):
    """Bad configuration: unknown profile kind, unknown key, invalid value."""


class DomainError(FieldlineError, ValueError):
    """A function was evaluated outside its domain (e.g. at a singularity)."""


class NumericError(FieldlineError, ArithmeticError):
    """A numerical procedure failed to converge or met a non-integrable input."""


class ForbiddenStartError(NumericError):
    """The motion coordinate starts where the radicand is negative."""


class DegenerateTurningPointError(NumericError):
    """A double root of the radicand (separatrix) was met by the quadrature path."""


class MultiWellError(NumericError):
    """More than two turning points were found for a single-well computation."""


class IntegrationFailure(NumericError):
    """The ODE integrator gave up; ``partial`` holds what was computed."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InvariantViolation(FieldlineError):
    """A produced trajectory breaks a conservation law beyond tolerance."""
