"""Image buffers: decoding, canonical content bytes and digests.

Images travel through the pipeline as read-only ``uint8`` arrays of shape
``(height, width, 3)``. Cache keys, mock embeddings and captioner fixtures all
hash the canonical content bytes, which depend on pixels only and never on
the file encoding.
"""

import hashlib
import io
import struct
from pathlib import Path
from typing import TypeAlias

import numpy as np
import numpy.typing as npt
from PIL import Image, UnidentifiedImageError

from comclip.errors import DecodeError

ImageArray: TypeAlias = npt.NDArray[np.uint8]

_CONTENT_MAGIC = b"RGB"


def as_image(array: npt.ArrayLike) -> ImageArray:
    """Validate ``array`` as an RGB image and return a read-only uint8 copy.

    Raises:
        DecodeError: If the array is not ``(H, W, 3)`` with H, W >= 1.
    """
    image = np.array(array, dtype=np.uint8, copy=True)
    if image.ndim != 3 or image.shape[2] != 3 or image.shape[0] < 1 or image.shape[1] < 1:
        raise DecodeError(f"Expected an (H, W, 3) image, got shape {image.shape}")
    image.setflags(write=False)
    return image


def load_image(path: str | Path) -> ImageArray:
    """Decode an image file to RGB.

    Raises:
        DecodeError: If the file is missing or cannot be decoded.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise DecodeError(f"Cannot decode image {path}: {e}") from e
    return decode_image(data, source=str(path))


def decode_image(data: bytes, source: str = "bytes") -> ImageArray:
    """Decode encoded image bytes (PNG, JPEG, ...) to RGB."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            return as_image(np.asarray(img.convert("RGB")))
    except (OSError, UnidentifiedImageError, ValueError) as e:
        raise DecodeError(f"Cannot decode image {source}: {e}") from e


def to_png_bytes(image: ImageArray) -> bytes:
    """Lossless PNG encoding, used on the captioner and encoder wire."""
    buffer = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(image)).save(buffer, format="PNG")
    return buffer.getvalue()


def save_image(image: ImageArray, path: str | Path) -> None:
    """Write ``image`` as PNG."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(to_png_bytes(image))


def content_bytes(image: ImageArray) -> bytes:
    """``b"RGB"`` + u32 height + u32 width (little endian) + raw RGB pixels."""
    height, width = image.shape[:2]
    header = _CONTENT_MAGIC + struct.pack("<II", height, width)
    return header + np.ascontiguousarray(image, dtype=np.uint8).tobytes()


def is_black_content(data: bytes) -> bool:
    """True if ``data`` is the canonical content of an all-zero-pixel image."""
    if not data.startswith(_CONTENT_MAGIC) or len(data) < 11:
        return False
    height, width = struct.unpack("<II", data[3:11])
    pixels = data[11:]
    return len(pixels) == height * width * 3 and not any(pixels)


def image_digest(image: ImageArray) -> str:
    """sha256 hex digest of the canonical content bytes."""
    return hashlib.sha256(content_bytes(image)).hexdigest()


def black_image(height: int, width: int) -> ImageArray:
    """An all-zero RGB image."""
    return as_image(np.zeros((height, width, 3), dtype=np.uint8))
