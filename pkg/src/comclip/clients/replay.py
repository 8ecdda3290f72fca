"""On-disk fixture store for recorded service responses.

A fixture directory holds one JSON file per request, named by the request key
(sha256 of the prompt text or of the canonical image bytes). Replay clients
read it; recording clients write it, so a run can be recorded once against
live services and replayed offline forever after.
"""

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, cast

from comclip.clients.base import ClientResponseError, FixtureMissing

logger = logging.getLogger(__name__)


def text_key(text: str) -> str:
    """Fixture key for a text request."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_atomic(path: Path, data: bytes) -> None:
    """Write ``data`` to ``path`` through a temp file and ``os.replace``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


class FixtureStore:
    """Directory of recorded JSON responses keyed by request hash."""

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)

    def __repr__(self) -> str:
        return f"FixtureStore({str(self.directory)!r})"

    def path_for(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def __contains__(self, key: str) -> bool:
        return self.path_for(key).is_file()

    def read(self, key: str) -> dict[str, Any]:
        """Return the recorded response for ``key``.

        Raises:
            FixtureMissing: If nothing was recorded for ``key``.
            ClientResponseError: If the recorded file is not a JSON object.
        """
        path = self.path_for(key)
        if not path.is_file():
            raise FixtureMissing(f"No recorded response {key[:12]}… in {self.directory}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except ValueError as e:
            raise ClientResponseError(f"Fixture {path.name} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ClientResponseError(f"Fixture {path.name} must hold a JSON object")
        return cast(dict[str, Any], data)

    def write(self, key: str, payload: dict[str, Any]) -> None:
        """Record ``payload`` under ``key`` (atomic, sorted keys)."""
        text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)
        write_atomic(self.path_for(key), text.encode("utf-8"))
        logger.debug("Recorded fixture %s", key[:12])
