"""Ablation grids: one evaluation row per composition config.

All rows are scored through scorers that share one embedding cache and one
parse/grounding memo, so each unique image, subimage and text is encoded
once across the whole grid.
"""

import logging
from collections.abc import Callable, Sequence
from typing import Any

from pydantic import BaseModel, Field

from comclip.composition.models import CompositionConfig, SubimageConfig
from comclip.errors import UsageError
from comclip.evaluation.metrics import (
    DEFAULT_PARALLELISM,
    Scorer,
    eval_matching,
    eval_vl_checklist,
    eval_winoground,
)
from comclip.evaluation.models import (
    DatasetKind,
    EvalReport,
    MatchInstance,
    VLChecklistPair,
    WinogroundInstance,
)

logger = logging.getLogger(__name__)

PRESETS: dict[str, tuple[SubimageConfig, ...]] = {
    "subimage_roles": (
        SubimageConfig.FULL,
        SubimageConfig.ALL_BLACK,
        SubimageConfig.ALL_ORIGINAL,
        SubimageConfig.SUBJECT_ONLY,
        SubimageConfig.OBJECT_ONLY,
        SubimageConfig.PREDICATE_ONLY,
    ),
    "all_except_one": (
        SubimageConfig.FULL,
        SubimageConfig.OMIT_SUBJECT,
        SubimageConfig.OMIT_OBJECT,
        SubimageConfig.OMIT_PREDICATE,
    ),
    "entity_only": (
        SubimageConfig.ENTITY_ONLY_SUBJECT,
        SubimageConfig.ENTITY_ONLY_PREDICATE,
        SubimageConfig.ENTITY_ONLY_OBJECT,
        SubimageConfig.ENTITY_ONLY_ALL,
        SubimageConfig.FULL,
    ),
}


def preset_configs(name: str, base: CompositionConfig | None = None) -> list[CompositionConfig]:
    """Configs of preset ``name``, each derived from ``base``.

    Raises:
        UsageError: If the preset is unknown.
    """
    if name not in PRESETS:
        available = ", ".join(sorted(PRESETS))
        raise UsageError(f"Unknown ablation preset {name!r}. Available: {available}")
    base = base or CompositionConfig()
    return [base.with_subimages(variant) for variant in PRESETS[name]]


def parse_config_list(spec: str, base: CompositionConfig | None = None) -> list[CompositionConfig]:
    """``"full,all_black"`` -> configs derived from ``base``.

    Raises:
        UsageError: On an unknown subimage config name.
    """
    base = base or CompositionConfig()
    configs = []
    for name in (part.strip() for part in spec.split(",")):
        if not name:
            continue
        try:
            configs.append(base.with_subimages(name))
        except ValueError as e:
            valid = ", ".join(v.value for v in SubimageConfig)
            raise UsageError(f"Unknown subimage config {name!r}. Valid: {valid}") from e
    if not configs:
        raise UsageError("No ablation configs given")
    return configs


class AblationRow(BaseModel):
    config: CompositionConfig
    report: EvalReport

    @property
    def label(self) -> str:
        return self.config.label


class AblationTable(BaseModel):
    """Rows in the order the configs were given."""

    dataset: str
    seed: int = 0
    rows: list[AblationRow] = Field(default_factory=list)
    baseline: EvalReport | None = Field(default=None, description="Uncomposed reference row")

    def headline(self, report: EvalReport) -> dict[str, float | None]:
        """The metric columns shown for ``report`` in tables."""
        if report.winoground is not None:
            return report.winoground.model_dump()
        if report.by_category:
            return dict(report.by_category)
        return {"overall": report.overall, **report.by_neg_type}

    def to_json_dict(self) -> dict[str, Any]:
        rows = [{**r.report.to_json_dict(), "config": r.label} for r in self.rows]
        return {
            "dataset": self.dataset,
            "seed": self.seed,
            "baseline": None if self.baseline is None else self.baseline.to_json_dict(),
            "rows": rows,
        }


async def evaluate_dataset(
    kind: DatasetKind,
    instances: Sequence[Any],
    scorer: Scorer,
    *,
    config: str,
    seed: int = 0,
    parallelism: int = DEFAULT_PARALLELISM,
    lenient: bool = False,
) -> EvalReport:
    """Run the protocol that matches ``kind``.

    Raises:
        UsageError: For retrieval, which needs a gallery and two scorers.
    """
    kwargs: dict[str, Any] = {
        "config": config,
        "seed": seed,
        "parallelism": parallelism,
        "lenient": lenient,
    }
    if kind.is_matching:
        matching: Sequence[MatchInstance] = instances
        return await eval_matching(matching, scorer, dataset=str(kind), **kwargs)
    if kind is DatasetKind.WINOGROUND:
        wino: Sequence[WinogroundInstance] = instances
        return await eval_winoground(wino, scorer, **kwargs)
    if kind is DatasetKind.VL_CHECKLIST:
        pairs: Sequence[VLChecklistPair] = instances
        return await eval_vl_checklist(pairs, scorer, **kwargs)
    raise UsageError(f"Dataset kind {kind!r} is not evaluated pairwise; use the rerank command")


async def run_ablation_grid(
    kind: DatasetKind,
    instances: Sequence[Any],
    configs: Sequence[CompositionConfig],
    scorer_for: Callable[[CompositionConfig], Scorer],
    *,
    baseline_scorer: Scorer | None = None,
    seed: int = 0,
    parallelism: int = DEFAULT_PARALLELISM,
    lenient: bool = False,
) -> AblationTable:
    """Evaluate ``instances`` once per config.

    Args:
        kind: Dataset protocol to run.
        instances: Loaded benchmark instances.
        configs: Composition configs, one row each.
        scorer_for: Builds the scorer for a config; scorers should share caches.
        baseline_scorer: When given, an uncomposed reference row is added.
        seed: Recorded in every report.
        parallelism: Concurrently scored instances.
        lenient: Skip and log failing instances instead of raising.

    Raises:
        UsageError: If ``configs`` is empty.
    """
    if not configs:
        raise UsageError("Ablation grid needs at least one config")

    common: dict[str, Any] = {"seed": seed, "parallelism": parallelism, "lenient": lenient}
    baseline = None
    if baseline_scorer is not None:
        baseline = await evaluate_dataset(
            kind, instances, baseline_scorer, config="baseline", **common
        )

    rows = []
    for config in configs:
        logger.info("Ablation row %s over %d instances", config.label, len(instances))
        report = await evaluate_dataset(
            kind, instances, scorer_for(config), config=config.label, **common
        )
        rows.append(AblationRow(config=config, report=report))
    return AblationTable(dataset=str(kind), seed=seed, rows=rows, baseline=baseline)
