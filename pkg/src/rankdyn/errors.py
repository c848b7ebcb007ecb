"""Exception hierarchy.

Input errors are problems with what the caller handed in (bad files, bad
arguments); computation errors are inputs that are well formed but leave a
calculation undefined. The CLI maps the two families to exit codes 1 and 2.
"""

from __future__ import annotations


class RankDynError(Exception):
    """Base class for every error raised by this package."""


class InputError(RankDynError, ValueError):
    """Malformed or out-of-range input."""


class DatasetError(InputError):
    """A validation failure located at a row/column of an input file."""

    def __init__(self, message: str, *, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column '{column}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ComputationError(RankDynError):
    """Well-formed input for which the requested quantity is undefined."""


class CalibrationError(ComputationError):
    """A gain cannot be calibrated from the given best-performer mark."""


class DegenerateIndicatorError(ComputationError):
    """An indicator has no positive value, so it cannot be scaled."""

    def __init__(self, indicator: str):
        self.indicator = indicator
        super().__init__(f"indicator {indicator} is degenerate: every value is zero")


class EstimationError(ComputationError):
    """Not enough usable data to estimate a parameter."""


class MatrixError(ComputationError):
    """A matrix is singular, indefinite or otherwise unusable."""
