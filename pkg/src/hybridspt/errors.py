"""Exception types raised across the package."""


class HybridSptError(Exception):
    """Base class for all package errors."""


class InvalidDimension(HybridSptError, ValueError):
    pass


class ShapeError(HybridSptError, ValueError):
    pass


class ResonanceError(HybridSptError, ValueError):
    pass


class DispersiveRegimeError(HybridSptError, ValueError):
    pass


class MechanicalInstability(HybridSptError, ValueError):
    """The bosonic quadratic form is not positive; no harmonic description."""


class PhaseDomainError(HybridSptError, ValueError):
    pass


class NotHermitian(HybridSptError, ValueError):
    pass


class ConvergenceFailure(HybridSptError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UndefinedCorrelation(HybridSptError, ValueError):
    pass


class InvalidOrder(HybridSptError, ValueError):
    pass


class IncompleteInput(HybridSptError, ValueError):
    pass


class SymmetryError(HybridSptError, ValueError):
    pass


class ConfigError(HybridSptError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
