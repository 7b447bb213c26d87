"""Exception types shared across the package."""

from __future__ import annotations


class ParseError(ValueError):
    """Malformed input text; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ValidationError(ValueError):
    """Structurally well-formed input that violates a semantic contract."""


class EnumerationLimitError(RuntimeError):
    """The brute-force search space exceeds the configured cap."""


class DeadlockError(RuntimeError):
    """A simulation cannot make progress; carries the blocked step indices."""

    def __init__(self, message: str, blocked: tuple[int, ...] = ()):
        self.blocked = tuple(blocked)
        super().__init__(message)


class ConsistencyError(RuntimeError):
    """Two computations that must agree disagreed (internal bug trap)."""
