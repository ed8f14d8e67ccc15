"""Exception types shared across the equalization and analysis modules."""


class DbpError(Exception):
    """Base class for all library-specific failures."""


class DimensionMismatchError(DbpError):
    """Array shapes are inconsistent with the system/partition dimensions."""


class SingularGramError(DbpError):
    """Gram matrix (or its diagonal) is singular for the requested equalizer."""


class NegativeVarianceError(DbpError):
    """A computed error variance came out negative; signals a numerical fault."""


class DivergenceError(DbpError):
    """Iterative equalization produced a non-finite intermediate."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class NonConvergenceError(DbpError):
    """Fixed-point iteration exhausted its iteration budget."""


class InvalidRegimeError(DbpError):
    """Requested operating point is outside the validity region (e.g. ZF with beta >= 1)."""


class InfeasibleError(DbpError):
    """No antenna ratio in the search range achieves the target rate."""


class ConfigError(DbpError):
    """Malformed or inconsistent run configuration."""
