"""Dense-captioner clients: HTTP service, fixture replay, recording and a null captioner."""

import base64
import logging
from typing import Any

import httpx
from pydantic import ValidationError

from comclip.clients.base import ClientResponseError, DenseCaptioner
from comclip.clients.http import ServiceClient
from comclip.clients.replay import FixtureStore
from comclip.clients.trace import TraceCollector
from comclip.grounding.images import ImageArray, image_digest, to_png_bytes
from comclip.grounding.models import DenseCaption

logger = logging.getLogger(__name__)


def captions_from_body(body: dict[str, Any]) -> list[DenseCaption]:
    """Validate a ``{"captions": [{"text", "box"}]}`` body.

    Fractional box coordinates are rounded to whole pixels.

    Raises:
        ClientResponseError: If the body does not match the contract.
    """
    raw = body.get("captions")
    if not isinstance(raw, list):
        raise ClientResponseError("Captioner response has no 'captions' list")
    captions: list[DenseCaption] = []
    for item in raw:
        try:
            box = [round(float(v)) for v in item["box"]]
            captions.append(DenseCaption(text=str(item["text"]), box=box))
        except (KeyError, TypeError, ValueError, ValidationError) as e:
            raise ClientResponseError(f"Malformed caption entry {item!r}: {e}") from e
    return captions


def captions_to_body(captions: list[DenseCaption]) -> dict[str, Any]:
    return {"captions": [{"text": c.text, "box": list(c.box)} for c in captions]}


class HTTPDenseCaptioner:
    """
    Client for the dense-captioning service.

    Wire contract: ``POST {endpoint}/dense_captions`` with ``{"image_b64": <PNG>}``,
    answered by ``{"captions": [{"text": ..., "box": [x1, y1, x2, y2]}]}``.
    """

    def __init__(self, service: ServiceClient) -> None:
        self._service = service

    @classmethod
    def from_endpoint(
        cls,
        endpoint: str,
        *,
        timeout_s: float = 30.0,
        retries: int = 2,
        max_in_flight: int = 4,
        backoff: float = 1.0,
        transport: httpx.AsyncBaseTransport | None = None,
        trace: TraceCollector | None = None,
    ) -> "HTTPDenseCaptioner":
        service = ServiceClient(
            endpoint,
            service="captioner",
            timeout_s=timeout_s,
            retries=retries,
            max_in_flight=max_in_flight,
            backoff=backoff,
            transport=transport,
            trace=trace,
        )
        return cls(service)

    def __repr__(self) -> str:
        return f"HTTPDenseCaptioner(endpoint={self._service.endpoint!r})"

    async def caption(self, image: ImageArray) -> list[DenseCaption]:
        payload = {"image_b64": base64.b64encode(to_png_bytes(image)).decode("ascii")}
        body = await self._service.post_json("/dense_captions", payload, operation="dense_captions")
        return captions_from_body(body)


class ReplayDenseCaptioner:
    """Serves recorded captions keyed by the sha256 of the canonical image bytes."""

    def __init__(self, store: FixtureStore) -> None:
        self._store = store

    def __repr__(self) -> str:
        return f"ReplayDenseCaptioner({self._store!r})"

    async def caption(self, image: ImageArray) -> list[DenseCaption]:
        return captions_from_body(self._store.read(image_digest(image)))


class RecordingDenseCaptioner:
    """Forwards to a live captioner and records every response."""

    def __init__(self, inner: DenseCaptioner, store: FixtureStore) -> None:
        self._inner = inner
        self._store = store

    def __repr__(self) -> str:
        return f"RecordingDenseCaptioner({self._inner!r}, {self._store!r})"

    async def caption(self, image: ImageArray) -> list[DenseCaption]:
        captions = await self._inner.caption(image)
        self._store.write(image_digest(image), captions_to_body(captions))
        return captions


class NullCaptioner:
    """Returns no captions, so every entity falls back to the original image."""

    def __repr__(self) -> str:
        return "NullCaptioner()"

    async def caption(self, image: ImageArray) -> list[DenseCaption]:
        return []
