"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class SolTestGenError(Exception):
    """Base class for all errors raised by the package."""


class SourceError(SolTestGenError):
    """An error tied to a position in the source text."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.message}"

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class LexError(SourceError):
    pass


class ParseError(SourceError):
    pass


class TypeCheckError(SourceError):
    """Type or scoping violation found by the resolver."""


class CfgError(SolTestGenError):
    pass


class AnalysisError(SolTestGenError):
    def __init__(self, message: str, function: str = "", node: int | None = None):
        super().__init__(message)
        self.function = function
        self.node = node


class SetupError(SolTestGenError):
    """A test case does not match the entry function's signature."""


class ShapeError(SolTestGenError):
    """Chromosome shape does not match a signature or its mate."""


class DegenerateError(SolTestGenError):
    """The search has nothing to optimize (e.g. no def-use pairs)."""
