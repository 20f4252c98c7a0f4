"""Exception hierarchy shared across the package."""

from __future__ import annotations


class LppmError(Exception):
    """Base class for every error raised by lppm_bench."""


class OutOfProjectionRange(LppmError, ValueError):
    """A point lies too far from the reference for the local tangent plane."""


class ParseError(LppmError, ValueError):
    """A dataset file contains a malformed row."""

    def __init__(self, message: str, path: object = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class MissingDirectory(LppmError, FileNotFoundError):
    pass


class RuleMismatch(LppmError, ValueError):
    """A preprocessing rule needs a field the dataset does not carry."""


class DomainError(LppmError, ValueError):
    pass


class EmptyGraph(LppmError, ValueError):
    pass


class LengthMismatch(LppmError, ValueError):
    pass


class TimestampMismatch(LppmError, ValueError):
    pass


class ConfigError(LppmError, ValueError):
    pass
