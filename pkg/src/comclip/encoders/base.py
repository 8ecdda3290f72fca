"""Encoder-backend contract and embedding vectors.

Every backend maps an image or a text to a vector of its declared dimension.
Vectors are L2-normalized at the backend boundary; the zero vector is allowed
(it is what the mock backend returns for an all-black image) and is reported
with ``normalized=False``.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import StrEnum
from typing import Self

import numpy as np
import numpy.typing as npt

from comclip.errors import DataError, DimensionMismatch
from comclip.grounding.images import ImageArray

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-6

FloatArray = npt.NDArray[np.float32]


class Modality(StrEnum):
    IMAGE = "image"
    TEXT = "text"


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    """A float32 embedding and whether it has unit L2 norm."""

    values: FloatArray
    normalized: bool

    def __post_init__(self) -> None:
        if self.values.ndim != 1:
            raise DataError(f"Embedding must be 1-D, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DataError("Embedding has non-finite components")

    @classmethod
    def from_values(cls, values: npt.ArrayLike, normalized: bool) -> Self:
        """Wrap ``values`` as a read-only float32 vector without rescaling."""
        array = np.array(values, dtype=np.float32, copy=True)
        array.setflags(write=False)
        return cls(values=array, normalized=normalized)

    @classmethod
    def unit(cls, values: npt.ArrayLike) -> Self:
        """L2-normalize ``values``; the zero vector stays zero with ``normalized=False``."""
        raw = np.asarray(values, dtype=np.float64)
        norm = float(np.linalg.norm(raw))
        if norm == 0.0:
            return cls.from_values(np.zeros_like(raw), normalized=False)
        return cls.from_values(raw / norm, normalized=True)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values.astype(np.float64)))

    @property
    def is_zero(self) -> bool:
        return not bool(np.any(self.values))

    def __repr__(self) -> str:
        return f"EmbeddingVector(dim={self.dim}, normalized={self.normalized})"


class EncoderBackend(ABC):
    """
    An image and text encoder with a stable identity.

    ``id`` is part of every cache key: two backends with the same ``id`` must
    return the same vector for the same input forever. Backends that cannot
    serve concurrent calls set ``concurrent_safe = False``.
    """

    id: str
    dim: int
    preprocessing: str = "none"
    concurrent_safe: bool = True

    @abstractmethod
    async def encode_image(self, image: ImageArray) -> EmbeddingVector:
        """Embed an RGB image."""

    @abstractmethod
    async def encode_text(self, text: str) -> EmbeddingVector:
        """Embed a canonical (trimmed, non-empty) text."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}(id={self.id!r}, dim={self.dim})"


def canonical_text(text: str) -> str:
    """Text preprocessing shared by every backend: surrounding whitespace is trimmed.

    Raises:
        DataError: If nothing is left after trimming.
    """
    canonical = text.strip()
    if not canonical:
        raise DataError("Cannot encode empty text")
    return canonical


def _check(backend: EncoderBackend, vector: EmbeddingVector) -> EmbeddingVector:
    if vector.dim != backend.dim:
        raise DimensionMismatch(
            f"Backend {backend.id!r} declared dim {backend.dim} but returned {vector.dim}"
        )
    if vector.normalized and abs(vector.norm - 1.0) > NORM_TOLERANCE:
        raise DataError(f"Backend {backend.id!r} returned a vector flagged unit with norm {vector.norm}")
    return vector


async def encode_image(backend: EncoderBackend, image: ImageArray) -> EmbeddingVector:
    """Embed ``image`` with ``backend`` and check the declared dimension.

    Raises:
        BackendUnavailable: If the backend cannot produce an embedding.
        DecodeError: If the image is not a valid RGB buffer.
    """
    return _check(backend, await backend.encode_image(image))


async def encode_text(backend: EncoderBackend, text: str) -> EmbeddingVector:
    """Embed trimmed ``text`` with ``backend`` and check the declared dimension.

    Raises:
        BackendUnavailable: If the backend cannot produce an embedding.
        DataError: If ``text`` is blank.
    """
    return _check(backend, await backend.encode_text(canonical_text(text)))
