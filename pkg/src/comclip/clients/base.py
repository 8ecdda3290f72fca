"""Service-client interfaces and the client exception hierarchy.

Every model the pipeline talks to (LLM, dense captioner, encoder service) sits
behind a small async protocol, so live HTTP clients, the Claude client and the
fixture-replay clients are interchangeable.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Protocol, runtime_checkable

from comclip.errors import BackendError

if TYPE_CHECKING:
    from comclip.grounding.images import ImageArray
    from comclip.grounding.models import DenseCaption


class ClientError(BackendError):
    """Base exception for service-client failures."""


class ClientAPIError(ClientError):
    """Raised when a service call fails after retries are exhausted."""

    def __init__(self, message: str, status_code: int | None = None) -> None:
        super().__init__(message)
        self.status_code = status_code


class ClientResponseError(ClientError):
    """Raised when a service response cannot be parsed."""


class FixtureMissing(ClientError):
    """Raised when replay mode has no recorded response for a request."""


@runtime_checkable
class LLMClient(Protocol):
    """Text-completion client used by the LLM parser and aligner."""

    async def complete(self, prompt: str, max_tokens: int = 512) -> str:
        """Return the model's text reply to ``prompt``."""
        ...


@runtime_checkable
class DenseCaptioner(Protocol):
    """Region-captioning client: one caption and box per detected region."""

    async def caption(self, image: ImageArray) -> list[DenseCaption]:
        """Return dense captions for ``image``."""
        ...
