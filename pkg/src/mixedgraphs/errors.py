"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MixedGraphError(Exception):
    """Base class for domain errors raised by this package."""


class InvalidGraph(MixedGraphError, ValueError):
    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = list(violations or [])


class UnknownNode(MixedGraphError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown node"


class InvalidPartition(MixedGraphError, ValueError):
    pass


class InvalidSplit(MixedGraphError, ValueError):
    pass


class ParseError(MixedGraphError, ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        loc = f"line {line}, column {column}: " if line else ""
        super().__init__(loc + message)
        self.line = line
        self.column = column


class NegativeEntry(MixedGraphError, ValueError):
    pass


class NotTriangular(MixedGraphError, ValueError):
    pass


class NotSymmetric(MixedGraphError, ValueError):
    pass


class DimensionMismatch(MixedGraphError, ValueError):
    pass


class SingularPivot(MixedGraphError, ArithmeticError):
    pass


class SingularBlock(MixedGraphError, ArithmeticError):
    pass


class SingularMatrix(MixedGraphError, ArithmeticError):
    pass


class NotPositiveDefinite(MixedGraphError, ValueError):
    pass


class InvalidProbability(MixedGraphError, ValueError):
    def __init__(self, message: str, assignment: dict[int, int] | None = None):
        super().__init__(message)
        self.assignment = assignment


class NotRealizable(MixedGraphError, ValueError):
    pass


class UnsupportedStructure(MixedGraphError, ValueError):
    """The graph is valid but outside what a model family can generate."""
