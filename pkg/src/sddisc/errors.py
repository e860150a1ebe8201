"""Exception types raised across the package."""


class SdDiscError(Exception):
    """Base class for all package errors."""


class ValidationError(SdDiscError, ValueError):
    """Bad input: wrong shape, wrong domain, parameter out of range."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class PoleAtFrequencyError(SdDiscError, ArithmeticError):
    """The evaluation point coincides with a pole of the system."""


class UnstableSystemError(SdDiscError, ValueError):
    """An operation that needs a stable system received an unstable one."""


class RiccatiError(SdDiscError, ArithmeticError):
    """No stabilizing Riccati solution, or the residual check failed."""


class SynthesisError(SdDiscError, ArithmeticError):
    """gamma-iteration could not find a feasible level."""


class ConditioningError(SdDiscError, ArithmeticError):
    """A synthesized filter failed its a-posteriori norm certification."""
