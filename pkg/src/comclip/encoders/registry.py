"""Global registry mapping backend names to encoder factories.

A factory builds an `EncoderBackend` from the run configuration. Built-in
backends (``mock``, ``remote``) register at import time; others can use the
`@register_backend` decorator or `register_backend_factory`.

Example:
    @register_backend("my_clip")
    def build_my_clip(config: RunConfig, trace: TraceCollector | None) -> EncoderBackend:
        return MyClipBackend(config.encoder_model)
"""

from __future__ import annotations

from collections.abc import Callable
from typing import TYPE_CHECKING

from comclip.clients.replay import FixtureStore
from comclip.encoders.base import EncoderBackend
from comclip.encoders.mock import MockBackend
from comclip.encoders.remote import RecordingBackend, RemoteBackend, ReplayBackend
from comclip.errors import UsageError

if TYPE_CHECKING:
    from comclip.clients.trace import TraceCollector
    from comclip.core.config import RunConfig

BackendFactory = Callable[["RunConfig", "TraceCollector | None"], EncoderBackend]

_REGISTRY: dict[str, BackendFactory] = {}


def register_backend(name: str) -> Callable[[BackendFactory], BackendFactory]:
    """Decorator registering a backend factory under ``name``.

    Raises:
        ValueError: If ``name`` is empty or already registered.
    """

    def decorator(factory: BackendFactory) -> BackendFactory:
        register_backend_factory(name, factory)
        return factory

    return decorator


def register_backend_factory(name: str, factory: BackendFactory) -> None:
    """Register a backend factory imperatively (the non-decorator path)."""
    if not name or not name.strip():
        raise ValueError("Backend name cannot be empty")
    if name in _REGISTRY:
        raise ValueError(f"Backend {name!r} is already registered")
    if not callable(factory):
        raise ValueError(f"Backend factory for {name!r} must be callable")
    _REGISTRY[name] = factory


def get_backend_factory(name: str) -> BackendFactory:
    """Return the factory registered under ``name``.

    Raises:
        UsageError: If ``name`` is not registered.
    """
    if name not in _REGISTRY:
        available = ", ".join(sorted(_REGISTRY))
        raise UsageError(f"Unknown encoder backend: {name!r}. Available backends: {available}")
    return _REGISTRY[name]


def list_backends() -> list[str]:
    """Return all registered backend names, sorted."""
    return sorted(_REGISTRY)


@register_backend("mock")
def _build_mock(config: RunConfig, trace: TraceCollector | None) -> EncoderBackend:
    return MockBackend(dim=config.mock_dim)


@register_backend("remote")
def _build_remote(config: RunConfig, trace: TraceCollector | None) -> EncoderBackend:
    """Live service, replay of recorded responses, or live service with recording."""
    if config.encoder_fixtures is not None and not config.record_fixtures:
        return ReplayBackend(
            FixtureStore(config.encoder_fixtures),
            model=config.encoder_model,
            dim=config.encoder_dim,
        )
    if not config.encoder_endpoint:
        raise UsageError("backend 'remote' needs encoder_endpoint or encoder_fixtures")
    live = RemoteBackend(
        config.encoder_endpoint,
        model=config.encoder_model,
        dim=config.encoder_dim,
        max_in_flight=config.parallelism,
        trace=trace,
    )
    if config.record_fixtures and config.encoder_fixtures is not None:
        return RecordingBackend(live, FixtureStore(config.encoder_fixtures))
    return live
