"""JSON-over-HTTP transport shared by the LLM, captioner and encoder clients.

A `ServiceClient` owns only the HTTP call, bounded concurrency, retries and
tracing. Request building and response parsing live in the concrete clients.
"""

import asyncio
import logging
import time
from datetime import UTC, datetime
from typing import Any, cast

import httpx
from tenacity import (
    AsyncRetrying,
    retry_if_exception,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
    wait_random,
)

from comclip.clients.base import ClientAPIError, ClientResponseError
from comclip.clients.trace import CallTrace, TraceCollector

logger = logging.getLogger(__name__)


def _is_retryable_status(exc: BaseException) -> bool:
    """Check if an exception is a retryable HTTP status error (429 or 5xx)."""
    return isinstance(exc, httpx.HTTPStatusError) and (
        exc.response.status_code == 429 or exc.response.status_code >= 500
    )


class ServiceClient:
    """
    POSTs JSON to one model service with retry, backoff and an in-flight cap.

    Transport errors and 429/5xx responses are retried ``retries`` times with
    exponential backoff (1s, 2s, 4s, max 10s, plus jitter, at the default
    ``backoff=1.0``). Everything else fails immediately.
    """

    def __init__(
        self,
        endpoint: str,
        *,
        service: str,
        timeout_s: float = 30.0,
        retries: int = 2,
        max_in_flight: int = 4,
        token: str | None = None,
        backoff: float = 1.0,
        transport: httpx.AsyncBaseTransport | None = None,
        trace: TraceCollector | None = None,
    ) -> None:
        """
        Args:
            endpoint: Base URL; request paths are appended to it.
            service: Service kind recorded in traces ("llm", "captioner", "encoder").
            timeout_s: Per-attempt timeout in seconds.
            retries: Retries after the first attempt.
            max_in_flight: Maximum concurrent requests.
            token: Optional bearer token.
            backoff: Backoff multiplier; 0 disables waiting (tests).
            transport: Optional httpx transport (e.g. `httpx.MockTransport`).
            trace: Optional collector receiving one `CallTrace` per call.
        """
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if retries < 0:
            raise ValueError("retries must be >= 0")
        self.endpoint = endpoint.rstrip("/")
        self.service = service
        self.timeout_s = timeout_s
        self.retries = retries
        self.max_in_flight = max_in_flight
        self._token = token
        self._backoff = backoff
        self._transport = transport
        self._trace = trace
        self._semaphore: asyncio.Semaphore | None = None
        self._semaphore_loop: asyncio.AbstractEventLoop | None = None

    def __repr__(self) -> str:
        return f"ServiceClient(service={self.service!r}, endpoint={self.endpoint!r})"

    def _get_semaphore(self) -> asyncio.Semaphore:
        # One semaphore per event loop; the CLI runs one asyncio.run per command.
        loop = asyncio.get_running_loop()
        if self._semaphore is None or self._semaphore_loop is not loop:
            self._semaphore = asyncio.Semaphore(self.max_in_flight)
            self._semaphore_loop = loop
        return self._semaphore

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self._token:
            headers["Authorization"] = f"Bearer {self._token}"
        return headers

    async def post_json(self, path: str, payload: dict[str, Any], *, operation: str) -> dict[str, Any]:
        """POST ``payload`` to ``{endpoint}{path}`` and return the decoded JSON object.

        Raises:
            ClientAPIError: If the call fails after retries are exhausted.
            ClientResponseError: If the body is not a JSON object.
        """
        url = f"{self.endpoint}{path}"
        attempts = 0
        start = time.perf_counter()
        error: str | None = None
        succeeded = False

        retrying = AsyncRetrying(
            retry=(
                retry_if_exception_type(httpx.TransportError)
                | retry_if_exception(_is_retryable_status)
            ),
            stop=stop_after_attempt(self.retries + 1),
            wait=wait_exponential(multiplier=self._backoff, min=self._backoff, max=10)
            + wait_random(min=0, max=self._backoff),
            reraise=True,
        )

        try:
            async with self._get_semaphore():
                async with httpx.AsyncClient(
                    timeout=self.timeout_s, transport=self._transport
                ) as client:
                    async for attempt in retrying:
                        with attempt:
                            attempts += 1
                            response = await client.post(url, json=payload, headers=self._headers())
                            response.raise_for_status()
            try:
                body = response.json()
            except ValueError as e:
                raise ClientResponseError(f"{self.service} returned invalid JSON: {e}") from e
            if not isinstance(body, dict):
                raise ClientResponseError(
                    f"{self.service} returned {type(body).__name__}, expected a JSON object"
                )
            succeeded = True
            return cast(dict[str, Any], body)
        except httpx.HTTPStatusError as e:
            error = f"HTTP {e.response.status_code}"
            raise ClientAPIError(
                f"{self.service} service error at {url}: HTTP {e.response.status_code}",
                status_code=e.response.status_code,
            ) from e
        except httpx.TransportError as e:
            error = type(e).__name__
            raise ClientAPIError(f"Connection to {self.service} service failed: {e}") from e
        except ClientResponseError as e:
            error = str(e)
            raise
        finally:
            if self._trace is not None:
                self._trace.add(
                    CallTrace(
                        timestamp=datetime.now(UTC),
                        service=self.service,
                        operation=operation,
                        latency_ms=int((time.perf_counter() - start) * 1000),
                        attempts=max(attempts, 1),
                        success=succeeded,
                        error=None if succeeded else (error or "unexpected failure"),
                    )
                )
            if attempts > 1:
                logger.debug("%s %s took %d attempts", self.service, operation, attempts)
