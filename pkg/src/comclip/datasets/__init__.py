"""Dataset loading for the benchmark protocols."""

from comclip.datasets.loader import (
    ImageStore,
    count_by_neg_type,
    dump_jsonl,
    load_comvg,
    load_dataset,
    load_retrieval,
    load_svo_probes,
    load_vl_checklist,
    load_winoground,
)
from comclip.datasets.schemas import DatasetManifest, RetrievalRow
from comclip.errors import DatasetLoadError, MissingImage, SchemaError

__all__ = [
    "DatasetLoadError",
    "DatasetManifest",
    "ImageStore",
    "MissingImage",
    "RetrievalRow",
    "SchemaError",
    "count_by_neg_type",
    "dump_jsonl",
    "load_comvg",
    "load_dataset",
    "load_retrieval",
    "load_svo_probes",
    "load_vl_checklist",
    "load_winoground",
]
