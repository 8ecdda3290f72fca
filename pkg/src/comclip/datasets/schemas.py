"""Dataset manifests and raw row schemas."""

from pathlib import Path

from pydantic import BaseModel, Field

from comclip.evaluation.models import DatasetKind


class RetrievalRow(BaseModel):
    """One caption of one gallery image; an image may have several rows."""

    image: str = Field(..., min_length=1)
    caption: str = Field(..., min_length=1)

    model_config = {"frozen": True, "extra": "forbid"}


class DatasetManifest(BaseModel):
    """
    What was loaded, from where, and a checksum of the source file.

    Attributes:
        kind: Dataset protocol.
        path: The JSONL file.
        root: Directory image refs are resolved against.
        count: Instances loaded (after lenient skips).
        checksum: sha256 of the JSONL file bytes.
        skipped_lines: Line numbers skipped in lenient mode.
    """

    kind: DatasetKind
    path: Path
    root: Path
    count: int = Field(..., ge=0)
    checksum: str = Field(..., min_length=64, max_length=64)
    skipped_lines: list[int] = Field(default_factory=list)

    model_config = {"frozen": True, "extra": "forbid"}
