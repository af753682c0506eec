"""Exception types raised by mesonbell."""


class MesonBellError(Exception):
    """Base class for all package errors."""


class ValidationError(MesonBellError, ValueError):
    """An input value violates a documented precondition.

    ``field`` names the offending argument when one can be singled out.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DomainError(ValidationError):
    """A parameter lies outside the domain of a correlation kernel."""


class ConsistencyError(MesonBellError, ArithmeticError):
    """A computed probability table failed an internal sanity check."""


class DegenerateConditioningError(MesonBellError, ZeroDivisionError):
    """Conditioning on both mesons surviving with zero survival mass."""


class DegenerateSampleError(MesonBellError, ValueError):
    """An estimator received no eligible events."""


class BracketingError(MesonBellError, RuntimeError):
    """No single sign change of the violation predicate could be bracketed."""
