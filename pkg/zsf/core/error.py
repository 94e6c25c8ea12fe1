from typing import Any


class ZsfError(Exception):
    """Custom error class for zsf errors."""

    exit_code: int = 1
    data: dict[str, Any]

    def __init__(
        self,
        message: str,
        *,
        exit_code: int | None = None,
        data: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)

        if exit_code:
            self.exit_code = exit_code

        if data:
            self.data = data
        else:
            self.data = {}


class ZsfValidationError(ZsfError):
    """Custom error class for errors caused by invalid input."""

    exit_code = 3


class ZsfParsingError(ZsfValidationError):
    """Raised when a sequence, spec or parameter fails to parse."""


class UnsupportedAmbientError(ZsfValidationError):
    """Raised when an integer-only operation gets a cyclic sequence."""


class InapplicableError(ZsfValidationError):
    """Raised when the hypotheses of a construction do not hold."""


class BudgetExceededError(ZsfError):
    """Raised when a search runs out of nodes or result slots."""

    exit_code = 2


class IncompleteEnumerationError(BudgetExceededError):
    """Raised when an invariant needs the complete set of factorizations."""


class ZsfDataError(ZsfError):
    """Raised when an internal consistency check fails."""
