"""
Exception hierarchy shared by the solvers and the command line.

Each class carries the process exit status the CLI uses when it surfaces.
Verification outcomes are reports, never exceptions.
"""
from typing import Optional


class CopuloptError(Exception):
    """Base class for all library errors."""
    exit_code = 3


class DomainError(CopuloptError, ValueError):
    """Invalid parameters or inputs outside the documented domain."""
    exit_code = 2


class InvalidMatrixError(DomainError):
    """Cost matrix is empty, non-square, oversize or has non-finite entries."""


class UnknownCostError(DomainError):
    """Requested registry cost does not exist."""


class CostExpressionError(DomainError):
    """Syntax error, unknown identifier or arity mismatch in a cost expression."""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} at offset {position}"
        super().__init__(message)


class HypothesisError(DomainError):
    """A solver's mathematical hypothesis does not hold for the given input."""


class NumericError(CopuloptError, RuntimeError):
    """Evaluation produced non-finite values or an iteration failed to converge."""
    exit_code = 3
