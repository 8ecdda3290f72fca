"""Entity-level similarity, reweighting and the composed matching score."""

from comclip.composition.models import (
    CompositionConfig,
    CompositionResult,
    EntityRecord,
    SubimageConfig,
    WeightingMode,
)
from comclip.composition.pipeline import (
    ComposedScorer,
    ScoringMemo,
    baseline_score,
    comclip_score,
)
from comclip.composition.similarity import compose, compose_visual, cosine, entity_weights

__all__ = [
    "ComposedScorer",
    "CompositionConfig",
    "CompositionResult",
    "EntityRecord",
    "ScoringMemo",
    "SubimageConfig",
    "WeightingMode",
    "baseline_score",
    "comclip_score",
    "compose",
    "compose_visual",
    "cosine",
    "entity_weights",
]
