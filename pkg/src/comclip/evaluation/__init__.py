"""Benchmark protocols, metrics and ablation grids."""

from comclip.evaluation.ablation import (
    PRESETS,
    AblationRow,
    AblationTable,
    evaluate_dataset,
    run_ablation_grid,
)
from comclip.evaluation.metrics import (
    Scorer,
    eval_matching,
    eval_retrieval,
    eval_vl_checklist,
    eval_winoground,
    recall_at_k,
    triplet_agreement,
    winoground_flags,
)
from comclip.evaluation.models import (
    DatasetKind,
    EvalReport,
    MatchInstance,
    NegType,
    RetrievalQuery,
    VLCategory,
    VLChecklistPair,
    WinogroundInstance,
)

__all__ = [
    "PRESETS",
    "AblationRow",
    "AblationTable",
    "DatasetKind",
    "EvalReport",
    "MatchInstance",
    "NegType",
    "RetrievalQuery",
    "Scorer",
    "VLCategory",
    "VLChecklistPair",
    "WinogroundInstance",
    "eval_matching",
    "eval_retrieval",
    "eval_vl_checklist",
    "eval_winoground",
    "evaluate_dataset",
    "recall_at_k",
    "run_ablation_grid",
    "triplet_agreement",
    "winoground_flags",
]
