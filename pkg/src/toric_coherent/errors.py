"""Exception hierarchy shared by every module."""


class ToricError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ToricError, ValueError):
    """Bit vectors of mismatched length were combined."""


class PreconditionError(ToricError, ValueError):
    """An input violates a documented precondition."""


class InvalidSyndromeError(PreconditionError):
    """A syndrome of odd weight cannot be the boundary of any chain."""


class BudgetExceededError(ToricError):
    """The requested enumeration is larger than the configured budget."""


class UndefinedConditionalError(ToricError, ZeroDivisionError):
    """A conditional quantity was requested for a syndrome of probability zero."""


class NumericalAssumptionError(ToricError, ArithmeticError):
    """A quantity that is analytically real and positive came out otherwise."""


class OracleGuardError(ToricError):
    """The brute-force oracle was asked to run on a lattice that is too large."""


class CacheError(ToricError):
    """The enumerator cache holds conflicting or unreadable records."""
