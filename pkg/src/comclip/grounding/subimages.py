"""Counterfactual subimage construction.

A subimage keeps the source pixels inside the union of its boxes and replaces
everything else with a background: exact zeros for the black fill, a Gaussian
blur of the source for the blur fill. Subimages are masked in place at full
canvas size, so subject, object and predicate subimages share geometry; the
``crop_tight`` option crops the result to the bounding box of the preserved
region instead.
"""

from collections.abc import Iterable, Sequence

import numpy as np
import numpy.typing as npt
from PIL import Image, ImageFilter

from comclip.errors import InvalidBox, NoRegions
from comclip.grounding.images import ImageArray, as_image
from comclip.grounding.models import BOX_TOLERANCE_PX, Box, FillPolicy, Subimage, SubimageKind

DEFAULT_BLUR_RADIUS_FRACTION = 0.05


def clamp_box(box: Sequence[int], width: int, height: int, tolerance: int = BOX_TOLERANCE_PX) -> Box:
    """Clamp ``box`` into the image, accepting overshoot of at most ``tolerance`` pixels.

    Raises:
        InvalidBox: If the box is degenerate or exceeds the image by more than ``tolerance``.
    """
    if len(box) != 4:
        raise InvalidBox(f"Box must have 4 coordinates, got {list(box)}")
    x1, y1, x2, y2 = (int(v) for v in box)
    if x1 >= x2 or y1 >= y2:
        raise InvalidBox(f"Degenerate box {(x1, y1, x2, y2)}")
    if x1 < -tolerance or y1 < -tolerance or x2 > width + tolerance or y2 > height + tolerance:
        raise InvalidBox(f"Box {(x1, y1, x2, y2)} exceeds {width}x{height} image")
    clamped = Box(max(0, x1), max(0, y1), min(width, x2), min(height, y2))
    if clamped.x1 >= clamped.x2 or clamped.y1 >= clamped.y2:
        raise InvalidBox(f"Box {(x1, y1, x2, y2)} is empty inside {width}x{height} image")
    return clamped


def region_mask(height: int, width: int, boxes: Iterable[Box]) -> npt.NDArray[np.bool_]:
    """Boolean mask of the union of ``boxes``."""
    mask = np.zeros((height, width), dtype=bool)
    for x1, y1, x2, y2 in boxes:
        mask[y1:y2, x1:x2] = True
    return mask


def _background(image: ImageArray, fill: FillPolicy, blur_radius_fraction: float) -> ImageArray:
    if fill is FillPolicy.BLACK:
        return np.zeros_like(image)
    height, width = image.shape[:2]
    radius = blur_radius_fraction * min(height, width)
    blurred = Image.fromarray(np.ascontiguousarray(image)).filter(
        ImageFilter.GaussianBlur(radius=radius)
    )
    return np.asarray(blurred, dtype=np.uint8)


def _masked_subimage(
    image: ImageArray,
    boxes: Sequence[Sequence[int]],
    fill: FillPolicy,
    kind: SubimageKind,
    blur_radius_fraction: float,
    crop_tight: bool,
) -> Subimage:
    height, width = image.shape[:2]
    clamped = tuple(dict.fromkeys(clamp_box(b, width, height) for b in boxes))
    mask = region_mask(height, width, clamped)

    pixels = _background(image, FillPolicy(fill), blur_radius_fraction).copy()
    pixels[mask] = image[mask]

    if crop_tight:
        ys, xs = np.nonzero(mask)
        pixels = pixels[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]

    return Subimage(
        pixels=as_image(pixels),
        kind=kind,
        source_boxes=clamped,
        fill_policy=FillPolicy(fill),
    )


def build_entity_subimage(
    image: ImageArray,
    boxes: Sequence[Sequence[int]],
    fill: FillPolicy = FillPolicy.BLACK,
    *,
    kind: SubimageKind = SubimageKind.SUBJECT,
    blur_radius_fraction: float = DEFAULT_BLUR_RADIUS_FRACTION,
    crop_tight: bool = False,
) -> Subimage:
    """Keep the union of ``boxes`` and fill the rest.

    Raises:
        InvalidBox: If any box exceeds the image bounds.
        NoRegions: If ``boxes`` is empty.
    """
    if not boxes:
        raise NoRegions(f"No regions to build a {kind} subimage from")
    return _masked_subimage(image, boxes, fill, kind, blur_radius_fraction, crop_tight)


def build_predicate_subimage(
    image: ImageArray,
    subject_boxes: Sequence[Sequence[int]],
    object_boxes: Sequence[Sequence[int]],
    fill: FillPolicy = FillPolicy.BLACK,
    *,
    blur_radius_fraction: float = DEFAULT_BLUR_RADIUS_FRACTION,
    crop_tight: bool = False,
) -> Subimage:
    """Keep the union of the subject and object regions.

    Raises:
        NoRegions: If both box lists are empty; callers substitute `fallback_subimage`.
        InvalidBox: If any box exceeds the image bounds.
    """
    boxes = [*subject_boxes, *object_boxes]
    if not boxes:
        raise NoRegions("Predicate subimage needs subject or object regions")
    return _masked_subimage(
        image, boxes, fill, SubimageKind.PREDICATE, blur_radius_fraction, crop_tight
    )


def fallback_subimage(image: ImageArray) -> Subimage:
    """The source image itself, used when an entity cannot be grounded."""
    return Subimage(pixels=as_image(image), kind=SubimageKind.FALLBACK_ORIGINAL)


def blank_subimage(image: ImageArray) -> Subimage:
    """An all-zero image with the source's dimensions."""
    return Subimage(pixels=as_image(np.zeros_like(image)), kind=SubimageKind.BLANK)
