"""Exception hierarchy shared by every module.

The CLI maps these to exit codes: domain/contract errors exit 1,
budget errors exit 3.
"""


class QuasilatticeError(Exception):
    """Base class for all library errors."""


class DomainError(QuasilatticeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ContractError(QuasilatticeError, ValueError):
    """A precondition of an operation was violated by the caller."""


class RationalityError(DomainError):
    """A rotation number turned out to be rational."""


class AmbiguityError(DomainError):
    """A decimal rotation number is too imprecise to decide membership."""


class BudgetError(QuasilatticeError, RuntimeError):
    """An enumeration or search would exceed its configured budget."""


class ParseError(QuasilatticeError, ValueError):
    """Malformed text input; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
