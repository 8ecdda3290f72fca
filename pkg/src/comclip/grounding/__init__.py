"""Entity grounding and counterfactual subimage construction."""

from comclip.grounding.images import ImageArray, content_bytes, image_digest, load_image
from comclip.grounding.models import (
    Box,
    DenseCaption,
    FillPolicy,
    GroundedEntity,
    GroundingMap,
    Subimage,
    SubimageKind,
)
from comclip.grounding.subimages import (
    blank_subimage,
    build_entity_subimage,
    build_predicate_subimage,
    clamp_box,
    fallback_subimage,
)

__all__ = [
    "Box",
    "DenseCaption",
    "FillPolicy",
    "GroundedEntity",
    "GroundingMap",
    "ImageArray",
    "Subimage",
    "SubimageKind",
    "blank_subimage",
    "build_entity_subimage",
    "build_predicate_subimage",
    "clamp_box",
    "content_bytes",
    "fallback_subimage",
    "image_digest",
    "load_image",
]
