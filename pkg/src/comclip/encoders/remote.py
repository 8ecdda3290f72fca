"""Out-of-process encoder backends: HTTP service, fixture replay and recording.

Wire contract: ``POST {endpoint}/encode`` with
``{"modality": "image", "payload_b64": <PNG>}`` or ``{"modality": "text", "text": ...}``,
answered by ``{"dim": int, "values": [float, ...]}``. Vectors are L2-normalized
on arrival.
"""

import base64
import hashlib
import logging
from abc import abstractmethod
from typing import Any

import httpx

from comclip.clients.base import ClientError, ClientResponseError
from comclip.clients.http import ServiceClient
from comclip.clients.replay import FixtureStore
from comclip.clients.trace import TraceCollector
from comclip.encoders.base import EmbeddingVector, EncoderBackend, Modality, canonical_text
from comclip.errors import BackendUnavailable, DimensionMismatch
from comclip.grounding.images import ImageArray, content_bytes, to_png_bytes

logger = logging.getLogger(__name__)


def request_key(modality: Modality, data: bytes) -> str:
    """Fixture key for an encode request: sha256(modality ‖ 0x00 ‖ content bytes)."""
    return hashlib.sha256(modality.value.encode("ascii") + b"\x00" + data).hexdigest()


def vector_from_body(body: dict[str, Any], dim: int) -> EmbeddingVector:
    """Validate an encode response and normalize it.

    Raises:
        ClientResponseError: If ``values`` is missing or not numeric.
        DimensionMismatch: If the vector length differs from ``dim``.
    """
    values = body.get("values")
    if not isinstance(values, list):
        raise ClientResponseError("Encoder response has no 'values' list")
    if len(values) != dim or body.get("dim", dim) != dim:
        raise DimensionMismatch(f"Encoder returned {len(values)} values, expected {dim}")
    try:
        return EmbeddingVector.unit([float(v) for v in values])
    except (TypeError, ValueError) as e:
        raise ClientResponseError(f"Encoder returned non-numeric values: {e}") from e


class _ServiceBackend(EncoderBackend):
    """Shared identity for the live and replayed encoder service."""

    preprocessing = "png-rgb/utf8-trimmed"

    def __init__(self, model: str, dim: int) -> None:
        self.model = model
        self.dim = dim
        self.id = f"remote-{model}-{dim}"

    async def encode_image(self, image: ImageArray) -> EmbeddingVector:
        return await self._encode(Modality.IMAGE, content_bytes(image), image=image)

    async def encode_text(self, text: str) -> EmbeddingVector:
        canonical = canonical_text(text)
        return await self._encode(Modality.TEXT, canonical.encode("utf-8"), text=canonical)

    async def _encode(
        self,
        modality: Modality,
        data: bytes,
        *,
        image: ImageArray | None = None,
        text: str | None = None,
    ) -> EmbeddingVector:
        try:
            body = await self._fetch(modality, data, image=image, text=text)
        except ClientError as e:
            raise BackendUnavailable(f"Encoder {self.id!r} failed on {modality}: {e}") from e
        return vector_from_body(body, self.dim)

    @abstractmethod
    async def _fetch(
        self,
        modality: Modality,
        data: bytes,
        *,
        image: ImageArray | None,
        text: str | None,
    ) -> dict[str, Any]:
        """Return the raw encode response body."""


class RemoteBackend(_ServiceBackend):
    """Encoder served over HTTP."""

    def __init__(
        self,
        endpoint: str,
        *,
        model: str = "clip",
        dim: int = 512,
        timeout_s: float = 30.0,
        retries: int = 2,
        max_in_flight: int = 8,
        backoff: float = 1.0,
        transport: httpx.AsyncBaseTransport | None = None,
        trace: TraceCollector | None = None,
    ) -> None:
        super().__init__(model, dim)
        self._service = ServiceClient(
            endpoint,
            service="encoder",
            timeout_s=timeout_s,
            retries=retries,
            max_in_flight=max_in_flight,
            backoff=backoff,
            transport=transport,
            trace=trace,
        )

    async def _fetch(
        self,
        modality: Modality,
        data: bytes,
        *,
        image: ImageArray | None,
        text: str | None,
    ) -> dict[str, Any]:
        payload: dict[str, Any] = {"modality": modality.value}
        if image is not None:
            payload["payload_b64"] = base64.b64encode(to_png_bytes(image)).decode("ascii")
        else:
            payload["text"] = text
        return await self._service.post_json("/encode", payload, operation=f"encode_{modality}")


class ReplayBackend(_ServiceBackend):
    """Encoder answers read from a fixture directory; shares the live backend's id."""

    def __init__(self, store: FixtureStore, *, model: str = "clip", dim: int = 512) -> None:
        super().__init__(model, dim)
        self._store = store

    async def _fetch(
        self,
        modality: Modality,
        data: bytes,
        *,
        image: ImageArray | None,
        text: str | None,
    ) -> dict[str, Any]:
        return self._store.read(request_key(modality, data))


class RecordingBackend(_ServiceBackend):
    """Live encoder whose every response is also written to a fixture directory."""

    def __init__(self, inner: RemoteBackend, store: FixtureStore) -> None:
        super().__init__(inner.model, inner.dim)
        self._inner = inner
        self._store = store

    async def _fetch(
        self,
        modality: Modality,
        data: bytes,
        *,
        image: ImageArray | None,
        text: str | None,
    ) -> dict[str, Any]:
        body = await self._inner._fetch(modality, data, image=image, text=text)
        self._store.write(request_key(modality, data), body)
        return body
