"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class SizeError(ValueError):
    """Raised when a problem exceeds an enumeration or dense-matrix bound."""


class AnalysisError(RuntimeError):
    """Raised when a post-processing step has nothing usable to work on."""


class BracketError(AnalysisError):
    """Raised when a bisection predicate does not change sign over its bracket."""
