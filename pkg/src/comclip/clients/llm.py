"""LLM clients: HTTP service, Claude, fixture replay and recording.

All of them implement `LLMClient.complete(prompt, max_tokens) -> str`.
"""

import logging
import os

import httpx
from anthropic import APIConnectionError, APIStatusError, AsyncAnthropic
from anthropic.types import Message
from tenacity import (
    retry,
    retry_if_exception,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
    wait_random,
)

from comclip.clients.base import ClientAPIError, ClientResponseError, LLMClient
from comclip.clients.http import ServiceClient
from comclip.clients.replay import FixtureStore, text_key
from comclip.clients.trace import TraceCollector
from comclip.errors import UsageError

logger = logging.getLogger(__name__)

LLM_TOKEN_ENV = "COMCLIP_LLM_TOKEN"
DEFAULT_CLAUDE_MODEL = "claude-sonnet-4-6"


class HTTPLLMClient:
    """
    Client for the LLM completion service.

    Wire contract: ``POST {endpoint}/complete`` with ``{"prompt", "max_tokens"}``,
    answered by ``{"text": ...}``. The bearer token defaults to the
    ``COMCLIP_LLM_TOKEN`` environment variable.
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
    ) -> "HTTPLLMClient":
        token = os.environ.get(LLM_TOKEN_ENV)
        service = ServiceClient(
            endpoint,
            service="llm",
            timeout_s=timeout_s,
            retries=retries,
            max_in_flight=max_in_flight,
            token=token,
            backoff=backoff,
            transport=transport,
            trace=trace,
        )
        return cls(service)

    def __repr__(self) -> str:
        return f"HTTPLLMClient(endpoint={self._service.endpoint!r})"

    async def complete(self, prompt: str, max_tokens: int = 512) -> str:
        body = await self._service.post_json(
            "/complete", {"prompt": prompt, "max_tokens": max_tokens}, operation="complete"
        )
        text = body.get("text")
        if not isinstance(text, str):
            raise ClientResponseError("LLM response has no string 'text' field")
        return text


class ClaudeLLMClient:
    """
    LLM client for Anthropic's Claude API.

    Retries rate limits, server errors and connection errors with tenacity
    exponential backoff (1s, 2s, 4s, max 10s).
    """

    def __init__(self, api_key: str | None = None, model: str = DEFAULT_CLAUDE_MODEL) -> None:
        resolved = api_key or os.environ.get("ANTHROPIC_API_KEY")
        if not resolved:
            raise UsageError("The claude LLM client needs ANTHROPIC_API_KEY to be set")
        self._client = AsyncAnthropic(api_key=resolved)
        self.model = model

    def __repr__(self) -> str:
        return f"ClaudeLLMClient(model={self.model!r})"

    async def complete(self, prompt: str, max_tokens: int = 512) -> str:
        """Send ``prompt`` as one user message and return the joined text blocks.

        Raises:
            ClientAPIError: If the call fails after retries are exhausted.
            ClientResponseError: If the reply has no text block.
        """

        def _is_retryable_api_error(exc: BaseException) -> bool:
            return isinstance(exc, APIStatusError) and (
                exc.status_code == 429 or exc.status_code >= 500
            )

        @retry(
            retry=(
                retry_if_exception_type(APIConnectionError)
                | retry_if_exception(_is_retryable_api_error)
            ),
            stop=stop_after_attempt(3),
            wait=wait_exponential(multiplier=1, min=1, max=10) + wait_random(min=0, max=1),
            reraise=True,
        )
        async def _call_with_retry() -> Message:
            return await self._client.messages.create(
                model=self.model,
                max_tokens=max_tokens,
                temperature=0.0,
                messages=[{"role": "user", "content": prompt}],
            )

        try:
            response = await _call_with_retry()
        except APIStatusError as e:
            raise ClientAPIError(f"Claude API error: {e.message}", status_code=e.status_code) from e
        except APIConnectionError as e:
            raise ClientAPIError(f"Connection to Claude API failed: {e}") from e

        text_blocks = [block.text for block in response.content if block.type == "text"]
        if not text_blocks:
            raise ClientResponseError("Claude reply contained no text block")
        return "\n".join(text_blocks)


class ReplayLLMClient:
    """Serves recorded completions keyed by sha256(prompt); never touches the network."""

    def __init__(self, store: FixtureStore) -> None:
        self._store = store

    def __repr__(self) -> str:
        return f"ReplayLLMClient({self._store!r})"

    async def complete(self, prompt: str, max_tokens: int = 512) -> str:
        body = self._store.read(text_key(prompt))
        text = body.get("text")
        if not isinstance(text, str):
            raise ClientResponseError("Recorded LLM fixture has no string 'text' field")
        return text


class RecordingLLMClient:
    """Forwards to a live client and records every reply into a fixture store."""

    def __init__(self, inner: LLMClient, store: FixtureStore) -> None:
        self._inner = inner
        self._store = store

    def __repr__(self) -> str:
        return f"RecordingLLMClient({self._inner!r}, {self._store!r})"

    async def complete(self, prompt: str, max_tokens: int = 512) -> str:
        text = await self._inner.complete(prompt, max_tokens)
        self._store.write(text_key(prompt), {"text": text})
        return text
