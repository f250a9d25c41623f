from __future__ import annotations


class FraisseError(Exception):
    """Base class for all errors raised by this package."""


class StructureSyntaxError(FraisseError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SignatureMismatch(FraisseError, ValueError):
    pass


class ClassSpecError(FraisseError, ValueError):
    pass


class BudgetExceeded(FraisseError):
    """Raised when a search runs past its node or time allowance."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
