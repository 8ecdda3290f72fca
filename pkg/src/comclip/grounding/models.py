"""Grounding data types: dense captions, grounding maps and subimages."""

from dataclasses import dataclass
from enum import StrEnum
from typing import Any, NamedTuple, Self

import numpy as np
from pydantic import BaseModel, Field, model_validator

from comclip.grounding.images import ImageArray
from comclip.parsing.models import Entity

# Captioner boxes may overshoot the image by this many pixels; they are clamped.
BOX_TOLERANCE_PX = 1


class Box(NamedTuple):
    """Pixel box ``(x1, y1, x2, y2)``, origin top-left, end-exclusive."""

    x1: int
    y1: int
    x2: int
    y2: int


class FillPolicy(StrEnum):
    """How pixels outside the preserved regions are rendered."""

    BLACK = "black"
    BLUR = "blur"


class SubimageKind(StrEnum):
    """What a subimage preserves."""

    SUBJECT = "subject"
    OBJECT = "object"
    PREDICATE = "predicate"
    FALLBACK_ORIGINAL = "fallback_original"
    BLANK = "blank"


class DenseCaption(BaseModel):
    """A region caption with its box, as emitted by a dense captioner."""

    text: str = Field(..., description="Region caption")
    box: Box = Field(..., description="(x1, y1, x2, y2) integer pixel box")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _check_box(self) -> Self:
        x1, y1, x2, y2 = self.box
        if min(x1, y1) < -BOX_TOLERANCE_PX or x1 >= x2 or y1 >= y2:
            raise ValueError(
                f"box must satisfy x1 < x2 and y1 < y2 with x1, y1 >= -{BOX_TOLERANCE_PX}, "
                f"got {self.box}"
            )
        return self


class GroundedEntity(BaseModel):
    """One entity with the boxes the aligner matched to it."""

    entity: Entity = Field(..., description="(word, role)")
    boxes: list[Box] = Field(..., min_length=1, description="Matched region boxes")
    captions: list[str] = Field(default_factory=list, description="Matched caption texts")

    model_config = {"frozen": True, "extra": "forbid"}


class GroundingMap(BaseModel):
    """Entity-to-region assignment for one image."""

    entries: list[GroundedEntity] = Field(default_factory=list, description="Grounded entities")
    unmatched: list[Entity] = Field(default_factory=list, description="Entities with no region")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _check_disjoint(self) -> Self:
        grounded = {e.entity for e in self.entries}
        if len(grounded) != len(self.entries):
            raise ValueError("an entity may be grounded only once")
        if grounded & set(self.unmatched):
            raise ValueError("unmatched entities must not also be grounded")
        return self

    def boxes_for(self, entity: Entity) -> list[Box]:
        """Boxes matched to ``entity`` (empty if unmatched)."""
        for entry in self.entries:
            if entry.entity == entity:
                return list(entry.boxes)
        return []

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "entries": [
                {
                    "word": e.entity.word,
                    "role": str(e.entity.role),
                    "boxes": [list(b) for b in e.boxes],
                    "captions": list(e.captions),
                }
                for e in self.entries
            ],
            "unmatched": [{"word": e.word, "role": str(e.role)} for e in self.unmatched],
        }


@dataclass(frozen=True, eq=False)
class Subimage:
    """A counterfactual image preserving only some regions of its source."""

    pixels: ImageArray
    kind: SubimageKind
    source_boxes: tuple[Box, ...] = ()
    fill_policy: FillPolicy = FillPolicy.BLACK

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.pixels.shape)

    def same_pixels(self, other: "Subimage | ImageArray") -> bool:
        """Pixel-exact comparison against another subimage or image."""
        pixels = other.pixels if isinstance(other, Subimage) else other
        return bool(self.pixels.shape == pixels.shape and np.array_equal(self.pixels, pixels))
