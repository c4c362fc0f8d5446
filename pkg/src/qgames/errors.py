from __future__ import annotations


class ValidationError(ValueError):
    """Input that violates a documented schema or type invariant.

    ``field`` names the offending field (dotted path) so CLI users can find it.
    """

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class InvariantViolation(ArithmeticError):
    """A numerical invariant broke beyond its stated tolerance."""
