"""Pytest configuration and fixtures for comclip tests."""

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from comclip.encoders.cache import CachedBackend, EmbeddingCache
from comclip.encoders.mock import MockBackend
from comclip.grounding.images import ImageArray, as_image, save_image
from comclip.parsing.llm import fallback_counter



def make_image(height: int = 32, width: int = 48, seed: int = 0) -> ImageArray:
    """Random RGB image with no all-zero pixel, so masked regions are visible."""
    rng = np.random.default_rng(seed)
    return as_image(rng.integers(1, 256, size=(height, width, 3), dtype=np.uint8))


def write_jsonl(path: Path, rows: list[dict[str, Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8")
    return path


@pytest.fixture(autouse=True)
def _reset_fallback_counter() -> None:
    fallback_counter.reset()


@pytest.fixture
def image() -> ImageArray:
    """A 32x48 random RGB image."""
    return make_image()


@pytest.fixture
def image_factory() -> Callable[..., ImageArray]:
    return make_image


@pytest.fixture
def mock_backend() -> MockBackend:
    return MockBackend(dim=64)


@pytest.fixture
def cached_backend(tmp_path: Path) -> CachedBackend:
    """Mock backend behind an on-disk cache in ``tmp_path``."""
    return CachedBackend(MockBackend(dim=64), EmbeddingCache(tmp_path / "cache"))


@pytest.fixture
def image_dir(tmp_path: Path) -> Path:
    """Six random PNGs named img0.png .. img5.png."""
    root = tmp_path / "images"
    for i in range(6):
        save_image(make_image(seed=i), root / f"img{i}.png")
    return root


@pytest.fixture
def comvg_file(image_dir: Path) -> Path:
    """Four ComVG rows over the image directory, one per negative type plus a repeat."""
    rows = [
        {
            "id": "c1",
            "sentence": "A man is hitting a baseball",
            "triplet": {"subject": "man", "predicate": "hitting", "object": "baseball"},
            "neg_type": "subject",
            "pos_image": "img0.png",
            "neg_image": "img1.png",
        },
        {
            "id": "c2",
            "sentence": "A dog chasing a ball on the grass",
            "triplet": {"subject": "dog", "predicate": "chasing", "object": "ball"},
            "neg_type": "predicate",
            "pos_image": "img2.png",
            "neg_image": "img3.png",
        },
        {
            "id": "c3",
            "sentence": "A cat sits on a table",
            "triplet": {"subject": "cat", "predicate": "sits", "object": "table"},
            "neg_type": "object",
            "pos_image": "img4.png",
            "neg_image": "img5.png",
        },
        {
            "id": "c4",
            "sentence": "A woman riding a horse",
            "triplet": {"subject": "woman", "predicate": "riding", "object": "horse"},
            "neg_type": "object",
            "pos_image": "img1.png",
            "neg_image": "img0.png",
            "pos_regions": {"subject": [[0, 0, 20, 32]], "object": [[20, 0, 48, 32]]},
        },
    ]
    return write_jsonl(image_dir / "comvg.jsonl", rows)


@pytest.fixture
def winoground_file(image_dir: Path) -> Path:
    rows = [
        {
            "id": "w1",
            "caption_0": "a mug in some grass",
            "caption_1": "some grass in a mug",
            "image_0": "img0.png",
            "image_1": "img1.png",
        },
        {
            "id": "w2",
            "caption_0": "a person is holding a dog",
            "caption_1": "a dog is holding a person",
            "image_0": "img2.png",
            "image_1": "img3.png",
        },
    ]
    return write_jsonl(image_dir / "winoground.jsonl", rows)


@pytest.fixture
def vl_checklist_file(image_dir: Path) -> Path:
    rows = [
        {
            "image": "img0.png",
            "pos_caption": "a red car parked near a tree",
            "neg_caption": "a blue car parked near a tree",
            "category": "Attribute",
        },
        {
            "image": "img1.png",
            "pos_caption": "a boy holding a kite",
            "neg_caption": "a boy holding a umbrella",
            "category": "object",
        },
        {
            "image": "img2.png",
            "pos_caption": "a horse standing behind a fence",
            "neg_caption": "a horse standing in front of a fence",
            "category": "relation",
        },
    ]
    return write_jsonl(image_dir / "vl_checklist.jsonl", rows)


@pytest.fixture
def retrieval_file(image_dir: Path) -> Path:
    rows = [
        {"image": f"img{i}.png", "caption": caption}
        for i, caption in enumerate(
            [
                "a man riding a bike down a street",
                "two dogs playing with a frisbee",
                "a woman holding an umbrella in the rain",
                "a boat floating on a lake",
                "a child eating a sandwich at a table",
                "a cat sleeping on a couch",
            ]
        )
    ]
    rows.append({"image": "img0.png", "caption": "a cyclist on a city road"})
    return write_jsonl(image_dir / "retrieval.jsonl", rows)
