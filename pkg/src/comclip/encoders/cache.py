"""Content-addressed on-disk embedding cache.

Record format (one file per embedding)::

    b"CEMB" | version 0x01 | u32 LE dim | dim x float32 LE

The key is ``sha256(backend.id ‖ modality ‖ content hash)``; records live in
a two-level fan-out (``ab/cd/abcd….cemb``). Writes go through a temp file and
``os.replace`` so concurrent readers never see a partial record. A record that
fails validation is recomputed and overwritten.
"""

import asyncio
import hashlib
import logging
import struct
from collections import OrderedDict
from collections.abc import Awaitable, Callable
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from comclip.clients.replay import write_atomic
from comclip.encoders.base import EmbeddingVector, EncoderBackend, Modality, canonical_text
from comclip.errors import CacheCorrupt
from comclip.grounding.images import ImageArray, image_digest

logger = logging.getLogger(__name__)

MAGIC = b"CEMB"
VERSION = 0x01
_HEADER = struct.Struct("<4sBI")
_SUFFIX = ".cemb"


def cache_key(backend_id: str, modality: Modality | str, content_hash: str) -> str:
    """sha256 over backend id, modality and content hash, NUL-separated."""
    raw = b"\x00".join(
        part.encode("utf-8") for part in (backend_id, str(modality), content_hash)
    )
    return hashlib.sha256(raw).hexdigest()


def text_content_hash(text: str) -> str:
    return hashlib.sha256(canonical_text(text).encode("utf-8")).hexdigest()


def encode_record(vector: EmbeddingVector) -> bytes:
    """Serialize ``vector`` to the binary record format."""
    values = np.ascontiguousarray(vector.values, dtype="<f4")
    return _HEADER.pack(MAGIC, VERSION, vector.dim) + values.tobytes()


def decode_record(data: bytes) -> EmbeddingVector:
    """Parse a binary record.

    Raises:
        CacheCorrupt: On bad magic, unknown version, length mismatch or non-finite values.
    """
    if len(data) < _HEADER.size:
        raise CacheCorrupt(f"Record too short ({len(data)} bytes)")
    magic, version, dim = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CacheCorrupt(f"Bad magic {magic!r}")
    if version != VERSION:
        raise CacheCorrupt(f"Unsupported record version {version}")
    if len(data) != _HEADER.size + 4 * dim:
        raise CacheCorrupt(f"Record length {len(data)} does not match dim {dim}")
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).astype(np.float32)
    if not np.all(np.isfinite(values)):
        raise CacheCorrupt("Record holds non-finite values")
    return EmbeddingVector.from_values(values, normalized=bool(np.any(values)))


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0
    corrupt: int = 0
    writes: int = 0


class EmbeddingCache:
    """Directory of embedding records addressed by `cache_key`."""

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        self.stats = CacheStats()

    def __repr__(self) -> str:
        return f"EmbeddingCache({str(self.directory)!r})"

    def path_for(self, key: str) -> Path:
        return self.directory / key[:2] / key[2:4] / f"{key}{_SUFFIX}"

    def read(self, key: str) -> EmbeddingVector | None:
        """Return the cached vector, or None on a miss.

        Raises:
            CacheCorrupt: If the record exists but fails validation.
        """
        path = self.path_for(key)
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            return None
        return decode_record(data)

    def write(self, key: str, vector: EmbeddingVector) -> None:
        write_atomic(self.path_for(key), encode_record(vector))
        self.stats.writes += 1

    async def get_or_compute(
        self, key: str, compute_fn: Callable[[], Awaitable[EmbeddingVector]]
    ) -> EmbeddingVector:
        """Return the cached vector bit-exactly, or compute, store and return it."""
        try:
            cached = self.read(key)
        except CacheCorrupt as e:
            self.stats.corrupt += 1
            logger.warning("Corrupt cache record %s (%s); recomputing", key[:12], e)
            cached = None

        if cached is not None:
            self.stats.hits += 1
            return cached

        self.stats.misses += 1
        vector = await compute_fn()
        self.write(key, vector)
        # Return what a later hit would return: the float32 round trip is exact.
        return decode_record(encode_record(vector))

    def entries(self) -> list[Path]:
        if not self.directory.exists():
            return []
        return sorted(self.directory.glob(f"*/*/*{_SUFFIX}"))

    def disk_usage(self) -> tuple[int, int]:
        """(record count, total bytes)."""
        paths = self.entries()
        return len(paths), sum(p.stat().st_size for p in paths)

    def clear(self) -> int:
        """Delete every record; returns how many were removed."""
        removed = 0
        for path in self.entries():
            path.unlink(missing_ok=True)
            removed += 1
        logger.info("Cleared %d cache records from %s", removed, self.directory)
        return removed


async def cache_get_or_compute(
    cache: EmbeddingCache, key: str, compute_fn: Callable[[], Awaitable[EmbeddingVector]]
) -> EmbeddingVector:
    """Module-level form of `EmbeddingCache.get_or_compute`."""
    return await cache.get_or_compute(key, compute_fn)


DEFAULT_MEMO_ENTRIES = 50_000


class SharedResults[K, V]:
    """
    Results computed at most once per key, kept for the ``max_entries`` most
    recently used keys.

    Concurrent requests for a key that is still being computed await the same
    task. The computation runs in a task of its own, so cancelling one caller
    leaves it running for the others. A failed computation is not remembered.
    """

    def __init__(self, max_entries: int | None = DEFAULT_MEMO_ENTRIES) -> None:
        if max_entries is not None and max_entries < 1:
            raise ValueError(f"max_entries must be positive, got {max_entries}")
        self.max_entries = max_entries
        self._done: OrderedDict[K, V] = OrderedDict()
        self._pending: dict[K, asyncio.Future[V]] = {}

    def __len__(self) -> int:
        return len(self._done)

    def __contains__(self, key: K) -> bool:
        return key in self._done

    async def get(self, key: K, compute: Callable[[], Awaitable[V]]) -> V:
        if key in self._done:
            self._done.move_to_end(key)
            return self._done[key]
        task = self._pending.get(key)
        if task is None:
            task = asyncio.ensure_future(compute())
            self._pending[key] = task
            task.add_done_callback(partial(self._settle, key))
        return await asyncio.shield(task)

    def _settle(self, key: K, task: asyncio.Future[V]) -> None:
        if self._pending.get(key) is task:
            del self._pending[key]
        # exception() also marks the error retrieved when every caller has gone.
        if task.cancelled() or task.exception() is not None:
            return
        self._done[key] = task.result()
        self._done.move_to_end(key)
        if self.max_entries is not None:
            while len(self._done) > self.max_entries:
                self._done.popitem(last=False)

    def clear(self) -> None:
        self._done.clear()


class CachedBackend(EncoderBackend):
    """
    Wraps a backend with an in-memory memo and an optional on-disk cache.

    Identical inputs requested concurrently share one computation, so each
    unique input reaches the inner backend once while it stays among the
    ``memo_entries`` most recently used. Backends declaring
    ``concurrent_safe = False`` are called one at a time.
    """

    def __init__(
        self,
        inner: EncoderBackend,
        cache: EmbeddingCache | None = None,
        memo_entries: int | None = DEFAULT_MEMO_ENTRIES,
    ) -> None:
        self.inner = inner
        self.cache = cache
        self.id = inner.id
        self.dim = inner.dim
        self.preprocessing = inner.preprocessing
        self.inner_calls = 0
        self._memo: SharedResults[str, EmbeddingVector] = SharedResults(memo_entries)
        self._serial: asyncio.Lock | None = None
        self._serial_loop: asyncio.AbstractEventLoop | None = None

    def __repr__(self) -> str:
        return f"CachedBackend({self.inner!r}, cache={self.cache!r})"

    async def encode_image(self, image: ImageArray) -> EmbeddingVector:
        key = cache_key(self.id, Modality.IMAGE, image_digest(image))
        return await self._memo.get(
            key, lambda: self._compute(key, lambda: self.inner.encode_image(image))
        )

    async def encode_text(self, text: str) -> EmbeddingVector:
        canonical = canonical_text(text)
        key = cache_key(self.id, Modality.TEXT, text_content_hash(canonical))
        return await self._memo.get(
            key, lambda: self._compute(key, lambda: self.inner.encode_text(canonical))
        )

    async def _call_inner(
        self, compute: Callable[[], Awaitable[EmbeddingVector]]
    ) -> EmbeddingVector:
        self.inner_calls += 1
        if self.inner.concurrent_safe:
            return await compute()
        loop = asyncio.get_running_loop()
        if self._serial is None or self._serial_loop is not loop:
            self._serial = asyncio.Lock()
            self._serial_loop = loop
        async with self._serial:
            return await compute()

    async def _compute(
        self, key: str, compute: Callable[[], Awaitable[EmbeddingVector]]
    ) -> EmbeddingVector:
        if self.cache is None:
            return await self._call_inner(compute)
        return await self.cache.get_or_compute(key, lambda: self._call_inner(compute))
