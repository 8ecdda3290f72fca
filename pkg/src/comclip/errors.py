"""Exception hierarchy for comclip.

Every error carries the CLI exit code it maps to, so the CLI can translate any
failure without a lookup table:

    1  usage error
    2  data error (bad input, schema, image, box, parse)
    3  backend error (encoder, LLM, dense captioner unreachable or misbehaving)
"""

from typing import Any, ClassVar


class ComclipError(Exception):
    """Base exception for all comclip failures."""

    exit_code: ClassVar[int] = 1

    def to_json(self) -> dict[str, Any]:
        """Machine-readable form used by ``--json-errors``."""
        return {
            "error": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


class UsageError(ComclipError):
    """Raised when a command is invoked with inconsistent arguments."""

    exit_code = 1


class DataError(ComclipError):
    """Raised when input data (sentences, images, rows, boxes) is invalid."""

    exit_code = 2


class ParseError(DataError):
    """Base exception for sentence parsing failures."""


class EmptySentence(ParseError):
    """Raised when a sentence is blank after trimming."""


class NoTripleFound(ParseError):
    """Raised when no subject-predicate-object structure is detected."""


class GroundingError(DataError):
    """Base exception for region and subimage failures."""


class InvalidBox(GroundingError):
    """Raised when a box lies outside the image or is degenerate."""


class NoRegions(GroundingError):
    """Raised when a predicate subimage has neither subject nor object regions."""


class DecodeError(DataError):
    """Raised when an image cannot be read or decoded."""


class DimensionMismatch(DataError):
    """Raised when vectors of different lengths are combined."""


class CacheCorrupt(DataError):
    """Raised when an embedding cache record fails validation."""


class BackendError(ComclipError):
    """Base exception for encoder and service-client failures."""

    exit_code = 3


class BackendUnavailable(BackendError):
    """Raised when an encoder backend cannot produce an embedding."""


class ParserUnavailable(BackendError):
    """Raised when the spaCy pipeline behind the rule-based parser is not installed."""


class DatasetLoadError(DataError):
    """Base exception for dataset ingestion failures."""


class SchemaError(DatasetLoadError):
    """Raised when a dataset row is missing fields or has the wrong types."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MissingImage(DatasetLoadError):
    """Raised when a dataset row references an image file that does not exist."""
