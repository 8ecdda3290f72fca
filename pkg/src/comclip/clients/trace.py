"""
Service-call trace observability.

Every LLM, captioner and encoder-service call records one `CallTrace`, so a
run can report call counts, failures and latency per service (``--trace``).
"""

import threading
from datetime import datetime

from pydantic import BaseModel, Field


class CallTrace(BaseModel):
    """Structured record of one service call. Payloads are never stored."""

    timestamp: datetime = Field(..., description="Call timestamp (UTC)")
    service: str = Field(..., description="Service kind: llm, captioner or encoder")
    operation: str = Field(..., description="Operation name (e.g. 'complete', 'encode_image')")
    latency_ms: int = Field(..., ge=0, description="Call latency in milliseconds")
    attempts: int = Field(default=1, ge=1, description="HTTP attempts including retries")
    success: bool
    error: str | None = None

    model_config = {"frozen": True, "extra": "forbid"}


class ServiceStats(BaseModel):
    """Aggregate of one service's calls."""

    calls: int = 0
    failures: int = 0
    retries: int = 0
    latency_ms: int = 0
    max_latency_ms: int = 0

    model_config = {"frozen": True}

    def plus(self, trace: CallTrace) -> "ServiceStats":
        return ServiceStats(
            calls=self.calls + 1,
            failures=self.failures + (0 if trace.success else 1),
            retries=self.retries + trace.attempts - 1,
            latency_ms=self.latency_ms + trace.latency_ms,
            max_latency_ms=max(self.max_latency_ms, trace.latency_ms),
        )


class TraceCollector:
    """Thread-safe, run-scoped list of call traces."""

    def __init__(self) -> None:
        self.traces: list[CallTrace] = []
        self._lock = threading.Lock()

    def add(self, trace: CallTrace) -> None:
        with self._lock:
            self.traces.append(trace)

    @property
    def failures(self) -> list[CallTrace]:
        return [t for t in self.traces if not t.success]

    def summary(self) -> dict[str, ServiceStats]:
        """Per-service totals, sorted by service name."""
        out: dict[str, ServiceStats] = {}
        for trace in list(self.traces):
            out[trace.service] = out.get(trace.service, ServiceStats()).plus(trace)
        return dict(sorted(out.items()))

    def total(self) -> ServiceStats:
        stats = ServiceStats()
        for trace in list(self.traces):
            stats = stats.plus(trace)
        return stats

    def clear(self) -> None:
        with self._lock:
            self.traces.clear()

    def __repr__(self) -> str:
        total = self.total()
        return (
            f"TraceCollector(calls={total.calls}, failures={total.failures}, "
            f"latency={total.latency_ms}ms)"
        )
