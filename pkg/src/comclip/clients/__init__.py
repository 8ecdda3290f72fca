"""Service clients for the LLM, dense-captioner and encoder services."""

from comclip.clients.base import (
    ClientAPIError,
    ClientError,
    ClientResponseError,
    DenseCaptioner,
    FixtureMissing,
    LLMClient,
)
from comclip.clients.trace import CallTrace, TraceCollector

__all__ = [
    "CallTrace",
    "ClientAPIError",
    "ClientError",
    "ClientResponseError",
    "DenseCaptioner",
    "FixtureMissing",
    "LLMClient",
    "TraceCollector",
]
