"""
Exception hierarchy for the corner singularity engine.

Every error raised on purpose by the package derives from ``CornerError`` so
that the command line front end can map it to an exit code in one place
(see ``eddycorner.error_handlers``).
"""
from .utils.config import ConfigError


class CornerError(Exception):
    """Base class for all engine errors."""
    pass


class DomainError(CornerError, ValueError):
    """Raised when an argument lies outside the domain of an operation.

    Typical causes are an angle in the wrong sector, a degenerate opening
    angle or a nonpositive radius.
    """
    pass


class SingularEvaluationError(DomainError):
    """Raised when a term is evaluated at r=0 where it is singular."""
    pass


class SectorMismatchError(CornerError, ValueError):
    """Raised when terms attached to different sectors are combined."""
    pass


class MixedLogError(CornerError, ArithmeticError):
    """Raised when an operation would produce log(z) * log(zbar) in one term."""
    pass


class ShadowEngineError(CornerError, RuntimeError):
    """Raised when the shadow recursion fails an internal consistency check."""
    pass


class QuadratureError(CornerError, RuntimeError):
    """Raised when panel doubling does not reach the requested agreement."""
    pass


class SolverError(CornerError, RuntimeError):
    """Raised for invalid grids or an inaccurate sparse solve."""
    pass


class ExtractionError(CornerError, ValueError):
    """Raised when an extraction precondition does not hold."""
    pass


class VerificationError(CornerError, AssertionError):
    """Raised when a numerical check (golden, residual, reference) fails."""
    pass


__all__ = [
    'ConfigError',
    'CornerError',
    'DomainError',
    'SingularEvaluationError',
    'SectorMismatchError',
    'MixedLogError',
    'ShadowEngineError',
    'QuadratureError',
    'SolverError',
    'ExtractionError',
    'VerificationError',
]
