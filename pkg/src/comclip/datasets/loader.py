"""JSONL loaders for the benchmark datasets.

Row schemas (one JSON object per line)::

    comvg / svo_probes  {"id", "sentence", "triplet": {"subject", "predicate", "object"},
                         "neg_type", "pos_image", "neg_image"}
    winoground          {"id", "caption_0", "caption_1", "image_0", "image_1"}
    vl_checklist        {"image", "pos_caption", "neg_caption", "category"}
    retrieval           {"image", "caption"}

Image refs are paths relative to the dataset root (the JSONL file's directory
unless given). Errors name the offending line; with ``lenient=True`` bad rows
and rows with missing images are logged and skipped instead.
"""

import hashlib
import json
import logging
from collections import Counter
from collections.abc import Iterator, Sequence
from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ValidationError

from comclip.datasets.schemas import DatasetManifest, RetrievalRow
from comclip.errors import DatasetLoadError, MissingImage, SchemaError
from comclip.evaluation.models import (
    DatasetKind,
    MatchInstance,
    NegType,
    RetrievalQuery,
    VLChecklistPair,
    WinogroundInstance,
)
from comclip.grounding.images import ImageArray, load_image

logger = logging.getLogger(__name__)

WINOGROUND_SIZE = 400


def _format_validation_error(error: ValidationError) -> str:
    """One ``field: message`` fragment per validation error."""
    parts = []
    for err in error.errors():
        field = " -> ".join(str(x) for x in err["loc"]) or "row"
        parts.append(f"{field}: {err['msg']}")
    return "; ".join(parts)


def _read_lines(path: Path) -> Iterator[tuple[int, bytes]]:
    """(line number, raw bytes) for every non-blank line; decoding is per row."""
    if not path.is_file():
        raise SchemaError(f"Dataset file not found: {path}")
    try:
        with path.open("rb") as f:
            for line_no, line in enumerate(f, start=1):
                if line.strip():
                    yield line_no, line
    except OSError as e:
        raise DatasetLoadError(f"Cannot read dataset file {path}: {e}") from e


def file_checksum(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _RowReader[M: BaseModel]:
    """Validates rows into ``model`` and tracks lenient skips."""

    def __init__(
        self, path: str | Path, model: type[M], root: str | Path | None, lenient: bool
    ) -> None:
        self.path = Path(path)
        self.model = model
        self.root = Path(root) if root is not None else self.path.parent
        self.lenient = lenient
        self.skipped_lines: list[int] = []

    def _validate(self, line_no: int, data: bytes) -> M:
        try:
            raw = json.loads(data.decode("utf-8"))
        except UnicodeDecodeError as e:
            raise SchemaError(f"invalid UTF-8 at byte {e.start}: {e.reason}", line=line_no) from e
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e.msg}", line=line_no) from e
        if not isinstance(raw, dict):
            raise SchemaError("row must be a JSON object", line=line_no)
        try:
            return self.model.model_validate(raw)
        except ValidationError as e:
            raise SchemaError(_format_validation_error(e), line=line_no) from e

    def _check_images(self, refs: Sequence[str], line_no: int) -> None:
        for ref in refs:
            if not (self.root / ref).is_file():
                raise MissingImage(f"line {line_no}: image not found: {self.root / ref}")

    def rows(self, image_fields: Sequence[str], check_images: bool) -> Iterator[M]:
        seen_ids: set[str] = set()
        has_id = "id" in self.model.model_fields
        for line_no, data in _read_lines(self.path):
            try:
                row = self._validate(line_no, data)
                if has_id:
                    row_id = str(getattr(row, "id"))
                    if row_id in seen_ids:
                        raise SchemaError(f"duplicate id {row_id!r}", line=line_no)
                    seen_ids.add(row_id)
                if check_images:
                    self._check_images([getattr(row, f) for f in image_fields], line_no)
            except (SchemaError, MissingImage) as e:
                if not self.lenient:
                    raise
                logger.warning("Skipping %s: %s", self.path.name, e)
                self.skipped_lines.append(line_no)
                continue
            yield row

    def manifest(self, kind: DatasetKind, count: int) -> DatasetManifest:
        return DatasetManifest(
            kind=kind,
            path=self.path,
            root=self.root,
            count=count,
            checksum=file_checksum(self.path),
            skipped_lines=self.skipped_lines,
        )


def count_by_neg_type(instances: Sequence[MatchInstance]) -> dict[str, int]:
    """Instances per negative type, every type present (zero if absent)."""
    counts = Counter(str(inst.neg_type) for inst in instances)
    return {str(t): counts.get(str(t), 0) for t in NegType}


def _load_matching(
    kind: DatasetKind,
    path: str | Path,
    root: str | Path | None,
    lenient: bool,
    check_images: bool,
) -> tuple[list[MatchInstance], DatasetManifest]:
    reader = _RowReader(path, MatchInstance, root, lenient)
    instances = list(reader.rows(("pos_image", "neg_image"), check_images))
    logger.info("Loaded %d %s instances %s", len(instances), kind, count_by_neg_type(instances))
    return instances, reader.manifest(kind, len(instances))


def _load_winoground(
    path: str | Path, root: str | Path | None, lenient: bool, check_images: bool
) -> tuple[list[WinogroundInstance], DatasetManifest]:
    reader = _RowReader(path, WinogroundInstance, root, lenient)
    instances = list(reader.rows(("image_0", "image_1"), check_images))
    if not instances:
        logger.warning("Winoground file %s holds no instances", reader.path)
    elif len(instances) != WINOGROUND_SIZE:
        logger.warning(
            "Winoground file %s holds %d instances, the full set has %d",
            reader.path,
            len(instances),
            WINOGROUND_SIZE,
        )
    return instances, reader.manifest(DatasetKind.WINOGROUND, len(instances))


def _load_vl_checklist(
    path: str | Path, root: str | Path | None, lenient: bool, check_images: bool
) -> tuple[list[VLChecklistPair], DatasetManifest]:
    reader = _RowReader(path, VLChecklistPair, root, lenient)
    pairs = list(reader.rows(("image",), check_images))
    return pairs, reader.manifest(DatasetKind.VL_CHECKLIST, len(pairs))


def _load_retrieval(
    path: str | Path, seed: int, root: str | Path | None, lenient: bool, check_images: bool
) -> tuple[list[RetrievalQuery], list[str], DatasetManifest]:
    reader = _RowReader(path, RetrievalRow, root, lenient)
    captions: dict[str, list[str]] = {}
    for row in reader.rows(("image",), check_images):
        captions.setdefault(row.image, []).append(row.caption)

    rng = np.random.default_rng(seed)
    queries = [
        RetrievalQuery(id=image, image=image, caption=options[int(rng.integers(len(options)))])
        for image, options in captions.items()
    ]
    return queries, list(captions), reader.manifest(DatasetKind.RETRIEVAL, len(queries))


def load_comvg(
    path: str | Path,
    *,
    root: str | Path | None = None,
    lenient: bool = False,
    check_images: bool = True,
) -> list[MatchInstance]:
    """Load a ComVG JSONL file.

    Raises:
        SchemaError: On a malformed row or duplicate id (message names the line).
        MissingImage: If a referenced image file does not exist.
    """
    return _load_matching(DatasetKind.COMVG, path, root, lenient, check_images)[0]


def load_svo_probes(
    path: str | Path,
    *,
    root: str | Path | None = None,
    lenient: bool = False,
    check_images: bool = True,
) -> list[MatchInstance]:
    """Load SVO-Probes rows (same schema as ComVG); whatever rows exist are ingested."""
    return _load_matching(DatasetKind.SVO_PROBES, path, root, lenient, check_images)[0]


def load_winoground(
    path: str | Path,
    *,
    root: str | Path | None = None,
    lenient: bool = False,
    check_images: bool = True,
) -> list[WinogroundInstance]:
    """Load a Winoground JSONL file; warns unless it holds the full 400 instances.

    Raises:
        SchemaError: On a malformed row or duplicate id.
        MissingImage: If a referenced image file does not exist.
    """
    return _load_winoground(path, root, lenient, check_images)[0]


def load_vl_checklist(
    path: str | Path,
    *,
    root: str | Path | None = None,
    lenient: bool = False,
    check_images: bool = True,
) -> list[VLChecklistPair]:
    """Load VL-checklist pos/neg caption pairs."""
    return _load_vl_checklist(path, root, lenient, check_images)[0]


def load_retrieval(
    path: str | Path,
    *,
    seed: int = 0,
    root: str | Path | None = None,
    lenient: bool = False,
    check_images: bool = True,
) -> tuple[list[RetrievalQuery], list[str]]:
    """Load caption rows and pick one caption per image with a seeded generator.

    Returns:
        (queries, gallery): one query per image, and the images in first-seen order.
    """
    queries, gallery, _ = _load_retrieval(path, seed, root, lenient, check_images)
    return queries, gallery


def load_dataset(
    kind: DatasetKind | str,
    path: str | Path,
    *,
    seed: int = 0,
    root: str | Path | None = None,
    lenient: bool = False,
    check_images: bool = True,
) -> tuple[list[Any], DatasetManifest]:
    """Load any dataset kind together with its manifest.

    For retrieval the instances are the queries; each query's image is also
    its gallery item.
    """
    kind = DatasetKind(kind)
    match kind:
        case DatasetKind.COMVG | DatasetKind.SVO_PROBES:
            return _load_matching(kind, path, root, lenient, check_images)
        case DatasetKind.WINOGROUND:
            return _load_winoground(path, root, lenient, check_images)
        case DatasetKind.VL_CHECKLIST:
            return _load_vl_checklist(path, root, lenient, check_images)
        case DatasetKind.RETRIEVAL:
            queries, _, manifest = _load_retrieval(path, seed, root, lenient, check_images)
            return queries, manifest


def dump_jsonl(rows: Sequence[BaseModel], path: str | Path) -> None:
    """Write rows in the loader's schema, one JSON object per line."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row.model_dump(mode="json", exclude_none=True), sort_keys=True))
            f.write("\n")


class ImageStore:
    """Decodes image refs relative to a root, keeping recently used images in memory."""

    def __init__(self, root: str | Path, max_images: int = 256) -> None:
        self.root = Path(root)
        self._load = lru_cache(maxsize=max_images)(self._load_uncached)

    def __repr__(self) -> str:
        return f"ImageStore({str(self.root)!r})"

    def _load_uncached(self, ref: str) -> ImageArray:
        path = self.root / ref
        if not path.is_file():
            raise MissingImage(f"image not found: {path}")
        return load_image(path)

    def get(self, ref: str) -> ImageArray:
        """Decoded RGB image for ``ref``.

        Raises:
            MissingImage: If the file does not exist.
            DecodeError: If it cannot be decoded.
        """
        return self._load(ref)
