"""Exception types shared across the package.

Each exception carries a ``category`` string and an ``exit_code`` so the
command-line layer can report failures in a machine-readable way.
"""

from __future__ import annotations


class PitcastError(Exception):
    """Base class for all package errors."""

    category = "internal"
    exit_code = 5


class ValidationError(PitcastError, ValueError):
    """An input violates a documented restriction."""

    category = "validation"
    exit_code = 2


class DomainError(ValidationError):
    """An input lies outside the mathematical domain of an operation."""


class UnsupportedModeError(ValidationError):
    """The requested combination of options is not defined."""


class BoundaryEvidenceError(PitcastError, ValueError):
    """Zero or all obligors defaulted, so the point estimate has no finite root."""

    category = "boundary-evidence"
    exit_code = 3


class InputFormatError(PitcastError):
    """A malformed input file. ``row``/``column`` locate the problem when known."""

    category = "io"
    exit_code = 4

    def __init__(self, message: str, *, path=None, row: int | None = None, column: str | None = None):
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.path = path
        self.row = row
        self.column = column


class LowDefaultWarning(UserWarning):
    """Too few defaults for a reliable point estimate of the systematic factor."""
