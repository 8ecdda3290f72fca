"""Encoder backends, embedding vectors and the on-disk embedding cache."""

from comclip.encoders.base import (
    NORM_TOLERANCE,
    EmbeddingVector,
    EncoderBackend,
    Modality,
    canonical_text,
    encode_image,
    encode_text,
)
from comclip.encoders.cache import (
    CachedBackend,
    EmbeddingCache,
    cache_get_or_compute,
    cache_key,
)
from comclip.encoders.mock import MockBackend, mock_encode
from comclip.encoders.registry import get_backend_factory, list_backends, register_backend
from comclip.encoders.remote import RemoteBackend

__all__ = [
    "NORM_TOLERANCE",
    "CachedBackend",
    "EmbeddingCache",
    "EmbeddingVector",
    "EncoderBackend",
    "MockBackend",
    "Modality",
    "RemoteBackend",
    "cache_get_or_compute",
    "cache_key",
    "canonical_text",
    "encode_image",
    "encode_text",
    "get_backend_factory",
    "list_backends",
    "mock_encode",
    "register_backend",
]
