"""Exception types raised across the package."""


class TFGammaError(Exception):
    """Base class for all package errors."""


class ValidationError(TFGammaError, ValueError):
    """Invalid input or configuration."""


class DimensionMismatchError(ValidationError):
    """Two objects live in different dimensions."""


class UnsupportedDimensionError(ValidationError):
    """The operation is only defined for particular dimensions."""


class AllocationError(TFGammaError):
    """Integer particle allocation cannot satisfy the rounding windows."""


class SizeError(ValidationError):
    """Problem is larger than the cap of a dense diagnostic."""


class NumericalError(TFGammaError):
    """Base for numeric failures (CLI exit code 3)."""


class ToleranceNotMetError(NumericalError):
    """A refinement or quadrature stopped short of its tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConvergenceError(NumericalError):
    """An iteration hit its cap without converging."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InfeasibleConstraintError(NumericalError):
    """The chemical-potential bracket cannot reach the mass constraint."""


class ShootingError(NumericalError):
    """The shooting bracket does not enclose a sign change."""
