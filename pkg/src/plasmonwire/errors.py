"""Exception types raised by the numerical layers."""


class PlasmonWireError(Exception):
    """Base class for all package errors."""


class DomainError(PlasmonWireError, ValueError):
    """Argument outside the mathematical domain of a function."""


class RangeError(PlasmonWireError, OverflowError):
    """Result or argument outside the representable/supported range."""


class SingularSystemError(PlasmonWireError, ArithmeticError):
    """Boundary system is singular or too ill-conditioned to solve.

    Signals proximity to a lossless plasmon pole.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConvergenceError(PlasmonWireError, RuntimeError):
    """Quadrature or harmonic sum failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ResolutionError(PlasmonWireError, ValueError):
    """A sampled profile does not resolve the feature being measured."""


class PreconditionError(PlasmonWireError, ValueError):
    """Inputs violate a documented precondition of an operation."""
