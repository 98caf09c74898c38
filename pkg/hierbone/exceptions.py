"""Hierbone Exceptions Module.

Defines custom exception classes for the hierbone library.
"""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path


class HierboneError(Exception):
    """Base exception for all hierbone related errors."""


class EmptyInputError(HierboneError, ValueError):
    """Raised when an input, merge or graph has nothing in it."""


class ParseError(HierboneError, ValueError):
    """Raised when a record of an input file cannot be parsed.

    Attributes:
        record: 0-based index of the offending record, when known.
        line: 1-based line number of the offending line, when known.
        path: Source file, when known.
    """

    def __init__(
        self,
        message: str,
        *,
        record: int | None = None,
        line: int | None = None,
        path: str | Path | None = None,
    ) -> None:
        self.record = record
        self.line = line
        self.path = None if path is None else Path(path)
        where = []
        if self.path is not None:
            where.append(str(self.path))
        if line is not None:
            where.append(f"line {line}")
        if record is not None:
            where.append(f"record {record}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class ConfigError(HierboneError, ValueError):
    """Raised for invalid thresholds, grids, column mappings or configs."""


class DomainError(HierboneError, ValueError):
    """Raised when an arithmetic precondition does not hold."""


class IntegrityError(HierboneError):
    """Raised when a graph violates a structural invariant.

    Attributes:
        cycle: One offending cycle as a node list, when the cause is a cycle.
    """

    def __init__(self, message: str, *, cycle: Sequence[str] | None = None) -> None:
        self.cycle = list(cycle) if cycle is not None else None
        if self.cycle:
            message = f"{message}: {' -> '.join(self.cycle)}"
        super().__init__(message)


class InputOutputError(HierboneError, OSError):
    """Raised when a path cannot be read or written."""

    def __init__(self, message: str, *, path: str | Path) -> None:
        self.path = Path(path)
        super().__init__(f"{message}: {self.path}")


class StageError(HierboneError):
    """Raised by the pipeline when a stage fails; wraps the original error."""

    def __init__(self, stage: str, error: BaseException) -> None:
        self.stage = stage
        self.error = error
        super().__init__(f"stage '{stage}' failed: {error}")
