"""
Exception hierarchy for norden-lab.

Library code raises these; only the command line turns them into exit codes.
"""
from typing import Optional, Tuple


class NordenLabError(Exception):
    """Base class for every error raised by norden-lab."""


class ArgumentError(NordenLabError, ValueError):
    """Invalid argument: dimension, order, slot, index or mismatched operands."""


class OrderBudgetError(ArgumentError):
    """A derivative order was requested beyond what the inputs carry."""


class UnsupportedDimensionError(ArgumentError):
    """Operation undefined in the requested dimension."""


class JetEvaluationError(NordenLabError, ArithmeticError):
    """
    Evaluation failure inside jet arithmetic.

    Attributes:
        operation: name of the failing operation (``div``, ``log``, ...)
        value: offending value, when there is one
        span: (start, end) byte range of the sub-expression, filled in by the
            expression evaluator
    """

    def __init__(self, message: str, operation: str = "", value: Optional[float] = None,
                 span: Optional[Tuple[int, int]] = None, source: str = ""):
        super().__init__(message)
        self.message = message
        self.operation = operation
        self.value = value
        self.span = span
        self.source = source

    def with_span(self, span: Tuple[int, int], source: str) -> "JetEvaluationError":
        """Return a copy annotated with the sub-expression that failed."""
        if self.span is not None:
            return self
        return JetEvaluationError(self.message, self.operation, self.value, span, source)

    def __str__(self) -> str:
        if self.span is None:
            return self.message
        start, end = self.span
        fragment = self.source.encode("utf-8")[start:end].decode("utf-8", errors="replace")
        return f"{self.message} (in '{fragment}' at bytes {start}-{end})"


class ExpressionError(NordenLabError, ValueError):
    """Expression text could not be turned into an expression tree."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset


class ExpressionSyntaxError(ExpressionError):
    """Text does not match the expression grammar."""


class UnknownIdentifierError(ExpressionError):
    """Identifier that is neither a coordinate, a constant nor a function."""


class CoordinateRangeError(ExpressionError):
    """Coordinate reference xK outside 1..dim."""


class ExponentError(ExpressionError):
    """Exponent after '^' is not an integer literal."""


class SingularMetricError(NordenLabError, ValueError):
    """Metric is singular or too badly conditioned to invert."""


class NordenAxiomError(NordenLabError, ValueError):
    """
    The almost Norden axioms fail at a point.

    Attributes:
        entry: human readable name of the worst entry, e.g. ``J^2[1][3]``
        residual: its absolute residual
    """

    def __init__(self, message: str, entry: str = "", residual: float = 0.0):
        super().__init__(message)
        self.entry = entry
        self.residual = residual


class ManifoldFileError(NordenLabError, ValueError):
    """Manifold file is unreadable, violates the schema or holds a bad expression."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
