"""Exception types shared across the toolkit."""

from __future__ import annotations


class MtmorphError(Exception):
    """Base class for every error raised by this package."""


class ParseError(MtmorphError):
    """A file (or embedded document) does not have the expected shape."""

    def __init__(self, message: str, path: str | None = None,
                 line: int | None = None, col: int | None = None):
        self.path = path
        self.line = line
        self.col = col
        prefix = f"{path}: " if path else ""
        if line is not None:
            where = f"line {line}" + (f", column {col}" if col is not None else "")
            prefix += f"{where}: "
        super().__init__(prefix + message)


class ValidationError(MtmorphError):
    """A metamodel violates one of its structural invariants."""


class ConformanceError(MtmorphError):
    """A model does not conform to its metamodel."""


class UnknownTypeError(MtmorphError):
    """A type name does not exist in the relevant metamodel."""


class MtlSyntaxError(MtmorphError):
    """Transformation source text could not be tokenized or parsed."""

    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


class AnalysisError(MtmorphError):
    """A transformation violates a scoping or uniqueness invariant."""


class ExecutionError(MtmorphError):
    """A transformation could not produce a conforming target model."""


class InconsistentPatternError(MtmorphError):
    """The same rule was observed with differing shapes across firings."""


class InfeasibleMutationError(MtmorphError):
    """A mutation cannot be applied to the given model."""


class InvalidLocusError(MtmorphError):
    """A fault seed names a rule or template that does not exist."""


class UnsatisfiableSeedError(MtmorphError):
    """A fault seed cannot yield a program that still analyzes cleanly."""


class MetamodelMismatchError(MtmorphError):
    """Two models that must share a metamodel do not."""
