"""Composition configuration and results."""

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from comclip.encoders.base import EmbeddingVector
from comclip.grounding.models import FillPolicy, SubimageKind
from comclip.parsing.models import ParsedSentence, Role


class WeightingMode(StrEnum):
    """How per-entity similarities become weights."""

    SOFTMAX = "softmax"
    RAW_SIMILARITY = "raw_similarity"


class SubimageConfig(StrEnum):
    """Which subimages take part in the composed visual feature."""

    FULL = "full"
    ALL_BLACK = "all_black"
    ALL_ORIGINAL = "all_original"
    SUBJECT_ONLY = "subject_only"
    OBJECT_ONLY = "object_only"
    PREDICATE_ONLY = "predicate_only"
    OMIT_SUBJECT = "omit_subject"
    OMIT_OBJECT = "omit_object"
    OMIT_PREDICATE = "omit_predicate"
    ENTITY_ONLY_SUBJECT = "entity_only_subject"
    ENTITY_ONLY_OBJECT = "entity_only_object"
    ENTITY_ONLY_PREDICATE = "entity_only_predicate"
    ENTITY_ONLY_ALL = "entity_only_all"

    @property
    def kept_role(self) -> Role | None:
        """For ``*_only`` configs, the role whose subimage is kept."""
        if self.value.endswith("_only"):
            return Role(self.value.removesuffix("_only"))
        return None

    @property
    def omitted_role(self) -> Role | None:
        """For ``omit_*`` configs, the role dropped from the sum."""
        if self.value.startswith("omit_"):
            return Role(self.value.removeprefix("omit_"))
        return None

    @property
    def is_entity_only(self) -> bool:
        return self.value.startswith("entity_only_")

    @property
    def entity_only_role(self) -> Role | None:
        """For ``entity_only_<role>`` configs, the role averaged over (None for ``entity_only_all``)."""
        if self.is_entity_only and self is not SubimageConfig.ENTITY_ONLY_ALL:
            return Role(self.value.removeprefix("entity_only_"))
        return None


class CompositionConfig(BaseModel):
    """One way of composing entity evidence into a matching score."""

    weighting_mode: WeightingMode = Field(
        default=WeightingMode.SOFTMAX, description="Softmax weights or raw similarities"
    )
    logit_scale: float = Field(default=100.0, gt=0, description="Multiplier applied before softmax")
    subimage_config: SubimageConfig = Field(
        default=SubimageConfig.FULL, description="Subimage ablation variant"
    )
    fill: FillPolicy = Field(default=FillPolicy.BLACK, description="Background fill policy")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def label(self) -> str:
        """Short name used as an ablation row key, e.g. ``full`` or ``full/blur``."""
        parts = [str(self.subimage_config)]
        if self.fill is not FillPolicy.BLACK:
            parts.append(str(self.fill))
        if self.weighting_mode is not WeightingMode.SOFTMAX:
            parts.append(str(self.weighting_mode))
        if self.logit_scale != 100.0:
            parts.append(f"scale={self.logit_scale:g}")
        return "/".join(parts)

    def with_subimages(self, subimage_config: SubimageConfig | str) -> "CompositionConfig":
        return self.model_copy(update={"subimage_config": SubimageConfig(subimage_config)})


@dataclass(frozen=True, eq=False)
class EntityRecord:
    """Per-entity evidence: its similarity to its own subimage and its weight.

    ``kind`` and ``subimage_emb`` are None for entity-only scoring.
    """

    word: str
    role: Role
    similarity: float
    weight: float
    word_emb: EmbeddingVector
    kind: SubimageKind | None = None
    subimage_emb: EmbeddingVector | None = None


@dataclass(frozen=True, eq=False)
class CompositionResult:
    """Everything that went into one composed matching score.

    ``global_score`` is cosine(text, global image), i.e. the baseline score.
    """

    sentence: str
    config: CompositionConfig
    parsed: ParsedSentence
    text_emb: EmbeddingVector
    global_image_emb: EmbeddingVector
    composed: npt.NDArray[np.float64]
    global_score: float
    final_score: float
    entity_records: tuple[EntityRecord, ...] = field(default_factory=tuple)

    @property
    def weights(self) -> list[float]:
        return [r.weight for r in self.entity_records]

    def to_explain_dict(self) -> dict[str, Any]:
        """JSON form for ``score --explain``."""
        return {
            "sentence": self.sentence,
            "config": self.config.model_dump(mode="json"),
            "parser": str(self.parsed.source),
            "triplets": [t.model_dump() for t in self.parsed.triplets],
            "global_score": self.global_score,
            "entities": [
                {
                    "word": r.word,
                    "role": str(r.role),
                    "subimage": None if r.kind is None else str(r.kind),
                    "similarity": r.similarity,
                    "weight": r.weight,
                }
                for r in self.entity_records
            ],
            "weights": self.weights,
            "composed_norm": float(np.linalg.norm(self.composed)),
            "final_score": self.final_score,
        }
