"""Exception hierarchy shared by every module.

Each class maps onto one CLI exit code through ``exit_code``.
"""

from __future__ import annotations


class MtlWeightError(Exception):
    """Base class. Anything raised deliberately by this package derives from it."""

    exit_code = 2


class EmptyTasks(MtlWeightError, ValueError):
    pass


class EmptyInput(MtlWeightError, ValueError):
    pass


class OutOfRange(MtlWeightError, ValueError):
    pass


class LengthMismatch(MtlWeightError, ValueError):
    pass


class ShapeMismatch(MtlWeightError, ValueError):
    pass


class NonFinite(MtlWeightError, ValueError):
    pass


class ZeroBaseline(MtlWeightError, ValueError):
    pass


class BadDimension(MtlWeightError, ValueError):
    pass


class BadProfile(MtlWeightError, ValueError):
    pass


class BadLabel(MtlWeightError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ParseError(MtlWeightError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class BadFraction(MtlWeightError, ValueError):
    pass


class TooFewSamples(MtlWeightError, ValueError):
    pass


class BadBatchSize(MtlWeightError, ValueError):
    pass


class InvalidConfig(MtlWeightError, ValueError):
    pass


class Divergence(MtlWeightError, ArithmeticError):
    """Training produced a non-finite loss."""

    exit_code = 4
