"""Deterministic hash-seeded encoder for model-free runs and tests.

An input's embedding is the L2-normalized draw of ``standard_normal(d)`` from a
numpy generator seeded with the first eight bytes of ``sha256(input)``. The
canonical bytes of an all-black image map to the zero vector, which makes an
all-black subimage contribute nothing to a composed score.
"""

import hashlib

import numpy as np

from comclip.encoders.base import EmbeddingVector, EncoderBackend, canonical_text
from comclip.grounding.images import ImageArray, content_bytes, is_black_content

MIN_MOCK_DIM = 8


def mock_seed(data: bytes) -> int:
    """Generator seed for ``data``: the first 8 digest bytes, little endian."""
    return int.from_bytes(hashlib.sha256(data).digest()[:8], "little")


def mock_encode(data: bytes, dim: int) -> EmbeddingVector:
    """Pseudo-random unit vector for ``data``; zero vector for an all-black image.

    Raises:
        ValueError: If ``dim`` < 8.
    """
    if dim < MIN_MOCK_DIM:
        raise ValueError(f"mock dimension must be >= {MIN_MOCK_DIM}, got {dim}")
    if is_black_content(data):
        return EmbeddingVector.from_values(np.zeros(dim), normalized=False)
    rng = np.random.default_rng(mock_seed(data))
    return EmbeddingVector.unit(rng.standard_normal(dim))


class MockBackend(EncoderBackend):
    """Encoder backed by `mock_encode` over canonical image bytes or UTF-8 text."""

    preprocessing = "canonical-rgb-bytes/utf8-trimmed"

    def __init__(self, dim: int = 512) -> None:
        if dim < MIN_MOCK_DIM:
            raise ValueError(f"mock dimension must be >= {MIN_MOCK_DIM}, got {dim}")
        self.dim = dim
        self.id = f"mock-{dim}"

    async def encode_image(self, image: ImageArray) -> EmbeddingVector:
        return mock_encode(content_bytes(image), self.dim)

    async def encode_text(self, text: str) -> EmbeddingVector:
        return mock_encode(canonical_text(text).encode("utf-8"), self.dim)
