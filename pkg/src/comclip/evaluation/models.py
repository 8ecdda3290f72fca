"""Benchmark instances and evaluation reports."""

from enum import StrEnum
from typing import Any, Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from comclip.grounding.models import Box
from comclip.parsing.models import EntityTriple, Role


class DatasetKind(StrEnum):
    COMVG = "comvg"
    SVO_PROBES = "svo_probes"
    WINOGROUND = "winoground"
    VL_CHECKLIST = "vl_checklist"
    RETRIEVAL = "retrieval"

    @property
    def is_matching(self) -> bool:
        """Pairwise pos/neg image datasets scored by `eval_matching`."""
        return self in (DatasetKind.COMVG, DatasetKind.SVO_PROBES)


class NegType(StrEnum):
    """Which triplet slot differs between the positive and negative image."""

    SUBJECT = "subject"
    PREDICATE = "predicate"
    OBJECT = "object"


class VLCategory(StrEnum):
    ATTRIBUTE = "attribute"
    OBJECT = "object"
    RELATION = "relation"


class MatchInstance(BaseModel):
    """One sentence with a positive and a negative image (ComVG / SVO-Probes rows)."""

    id: str = Field(..., min_length=1)
    sentence: str = Field(..., min_length=1)
    triplet: EntityTriple
    neg_type: NegType
    pos_image: str = Field(..., min_length=1, description="Image path relative to the dataset root")
    neg_image: str = Field(..., min_length=1, description="Image path relative to the dataset root")
    pos_regions: dict[Role, list[Box]] | None = Field(
        default=None, description="Optional ground-truth boxes per role for the positive image"
    )
    neg_regions: dict[Role, list[Box]] | None = Field(
        default=None, description="Optional ground-truth boxes per role for the negative image"
    )

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _distinct_images(self) -> Self:
        if self.pos_image == self.neg_image:
            raise ValueError(f"pos_image and neg_image must differ, both are {self.pos_image!r}")
        return self


class WinogroundInstance(BaseModel):
    """Two captions and two images; caption_i describes image_i."""

    id: str = Field(..., min_length=1)
    caption_0: str = Field(..., min_length=1)
    caption_1: str = Field(..., min_length=1)
    image_0: str = Field(..., min_length=1)
    image_1: str = Field(..., min_length=1)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _distinct_pairs(self) -> Self:
        if self.caption_0 == self.caption_1:
            raise ValueError("caption_0 and caption_1 must differ")
        if self.image_0 == self.image_1:
            raise ValueError("image_0 and image_1 must differ")
        return self


class VLChecklistPair(BaseModel):
    """An image with a correct and an incorrect caption."""

    image: str = Field(..., min_length=1)
    pos_caption: str = Field(..., min_length=1)
    neg_caption: str = Field(..., min_length=1)
    category: VLCategory

    model_config = ConfigDict(frozen=True, extra="forbid")

    @field_validator("category", mode="before")
    @classmethod
    def _lowercase(cls, v: Any) -> Any:
        return v.strip().lower() if isinstance(v, str) else v

    @property
    def id(self) -> str:
        return f"{self.image}::{self.pos_caption}"


class RetrievalQuery(BaseModel):
    """A caption whose single relevant gallery item is ``image``."""

    id: str = Field(..., min_length=1)
    caption: str = Field(..., min_length=1)
    image: str = Field(..., min_length=1)

    model_config = ConfigDict(frozen=True, extra="forbid")


class WinogroundScores(BaseModel):
    text: float = Field(..., ge=0.0, le=1.0)
    image: float = Field(..., ge=0.0, le=1.0)
    group: float = Field(..., ge=0.0, le=1.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _group_bounded(self) -> Self:
        if self.group > min(self.text, self.image):
            raise ValueError("group score cannot exceed text or image score")
        return self


class RecallScores(BaseModel):
    r1: float = Field(..., ge=0.0, le=1.0)
    r5: float = Field(..., ge=0.0, le=1.0)
    r10: float = Field(..., ge=0.0, le=1.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _monotone(self) -> Self:
        if not self.r1 <= self.r5 <= self.r10:
            raise ValueError("recall must be non-decreasing in K")
        return self


class GroupCount(BaseModel):
    correct: int = Field(..., ge=0)
    total: int = Field(..., ge=0)

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0


class InstanceScore(BaseModel):
    """Per-instance scores, exported to CSV and kept out of the JSON report."""

    id: str
    group: str = Field(default="", description="neg_type, category or empty")
    scores: dict[str, float] = Field(default_factory=dict)
    correct: bool


class EvalReport(BaseModel):
    """
    Result of one evaluation run.

    The JSON form always carries ``overall``, ``by_neg_type``, ``winoground``,
    ``recall``, ``config``, ``seed`` and ``n_instances``; metrics that do not
    apply to the dataset are null.
    """

    dataset: str = Field(..., description="Dataset kind, e.g. comvg or winoground")
    config: str = Field(..., description="Composition config label or 'baseline'")
    seed: int = 0
    n_instances: int = Field(default=0, ge=0)
    overall: float | None = Field(default=None, ge=0.0, le=1.0)
    by_neg_type: dict[str, float] = Field(default_factory=dict)
    counts: dict[str, GroupCount] = Field(default_factory=dict)
    by_category: dict[str, float] = Field(default_factory=dict)
    winoground: WinogroundScores | None = None
    recall: RecallScores | None = None
    skipped: list[str] = Field(default_factory=list)
    instance_scores: list[InstanceScore] = Field(default_factory=list, exclude=True)

    @model_validator(mode="after")
    def _counts_sum(self) -> Self:
        if self.counts and sum(c.total for c in self.counts.values()) != self.n_instances:
            raise ValueError("breakdown counts must sum to n_instances")
        return self

    def to_json_dict(self) -> dict[str, Any]:
        """Fixed-key JSON form; no timestamps, so identical runs serialize identically."""
        return {
            "dataset": self.dataset,
            "overall": self.overall,
            "by_neg_type": dict(sorted(self.by_neg_type.items())),
            "winoground": None if self.winoground is None else self.winoground.model_dump(),
            "recall": None if self.recall is None else self.recall.model_dump(),
            "by_category": dict(sorted(self.by_category.items())),
            "counts": {k: v.model_dump() for k, v in sorted(self.counts.items())},
            "config": self.config,
            "seed": self.seed,
            "n_instances": self.n_instances,
            "skipped": list(self.skipped),
        }
