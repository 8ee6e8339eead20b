"""Exception hierarchy shared by all tuplecover modules.

Every error that stems from bad user input (files, configuration,
annotations) derives from :class:`ToolError`; the CLI maps those to exit
code 1 and anything else to exit code 2.
"""

from __future__ import annotations


class ToolError(Exception):
    """Base class for all expected, user-facing failures."""


class ParseError(ToolError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


class CorpusValidationError(ToolError):
    """A record violates a corpus or annotation invariant."""


class ConfigError(ToolError):
    """Invalid configuration value or degenerate generator setup."""


class PreprocessingError(ToolError):
    """Text could not be reduced to a non-empty token sequence."""


class EmbeddingError(ToolError):
    """Embedding store construction or SIF fitting failed."""


class TrainingError(ToolError):
    """Model training preconditions not met."""


class ModelError(ToolError):
    """Model/store dimension mismatch or malformed model file."""


class SimilarityError(ToolError):
    """A similarity score is undefined (zero vector operand)."""


class CoverageUndefinedError(ToolError):
    """Tuple coverage requested for a case with no tuples."""


class EvaluationError(ToolError):
    """Predictions and ground truth cannot be aligned."""


class StatisticsError(ToolError):
    """Statistical test preconditions not met."""
