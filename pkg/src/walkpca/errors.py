"""Exception types raised across the package."""


class WalkPcaError(Exception):
    """Base class for all errors raised by walkpca."""


class InvalidDimensionError(WalkPcaError, ValueError):
    pass


class DegenerateCovarianceError(WalkPcaError, ValueError):
    pass


class SpecError(WalkPcaError, ValueError):
    """A process or experiment parameter is outside its valid range."""


class DimensionMismatchError(WalkPcaError, ValueError):
    pass


class DivergenceError(WalkPcaError, FloatingPointError):
    """A simulated state became non-finite."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class FormatError(WalkPcaError, ValueError):
    """A trajectory or table file could not be parsed."""


class ConvergenceError(WalkPcaError, ArithmeticError):
    pass


class DomainError(WalkPcaError, ValueError):
    pass
