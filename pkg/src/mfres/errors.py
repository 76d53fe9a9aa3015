"""Exception types shared across the package."""


class MfresError(Exception):
    """Base class for package errors."""


class DomainError(MfresError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class PrecisionError(MfresError, ArithmeticError):
    """A requested accuracy target cannot be certified."""


class ConstructionError(MfresError, RuntimeError):
    """A self-checking construction failed its internal validation."""


class TableExhaustedError(MfresError, LookupError):
    """A coefficient table is too short for the requested computation.

    Carries the bound that would have been needed so callers can rebuild.
    """

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed


class CacheError(MfresError, RuntimeError):
    """A cache entry is missing, stale, or fails its integrity check."""
