"""Exception types shared across the package."""

from __future__ import annotations


class AdvGainError(Exception):
    """Base class for every error raised by this package."""


class ParseError(AdvGainError):
    """A file could not be parsed; the message names the path and line."""

    def __init__(self, message: str, path=None, line: int | None = None):
        super().__init__(message)
        self.path = path
        self.line = line


class ValidationError(AdvGainError):
    """A data invariant was violated; the message names the offending record."""


class ConfigError(AdvGainError):
    """A run configuration is incomplete or inconsistent."""


class InsufficientDataError(AdvGainError):
    """A dataset is too small for the requested operation."""


class DimensionMismatchError(AdvGainError):
    """Vectors of different lengths were combined."""


class EmptyEncodingError(AdvGainError):
    """A text produced no usable tokens, so no vector can be formed."""


class MissingEmbeddingError(AdvGainError):
    """No precomputed vector is stored for the requested id."""


class ZeroVectorError(AdvGainError):
    """Cosine distance is undefined for a zero-norm vector."""


class InvalidDistributionError(AdvGainError):
    """A probability vector is malformed (negative mass, wrong sum, or length)."""


class MissingTargetError(AdvGainError):
    """Targeted gain was requested for a pair that carries no target output."""


class EmptyInputError(AdvGainError):
    """An aggregate was requested over an empty collection."""


class KTooLargeError(AdvGainError):
    """More neighbors were requested than the index holds."""


class InvalidConfidenceError(AdvGainError):
    """Confidence level must lie strictly between 0 and 1."""
