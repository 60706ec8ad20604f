class SphereSNEError(Exception):
    """Base class for errors raised by sphere_sne."""


class DomainError(SphereSNEError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class GenerationError(SphereSNEError, RuntimeError):
    """Simulation data could not be generated under the requested constraints."""


class NumericError(SphereSNEError, ArithmeticError):
    """A computation produced non-finite values."""
