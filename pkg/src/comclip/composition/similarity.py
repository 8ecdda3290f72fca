"""Similarity math over already-computed embeddings.

Everything here is pure and works in float64 over the float32 vectors the
encoders emit. The zero vector has cosine 0 against everything.
"""

from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from comclip.composition.models import WeightingMode
from comclip.encoders.base import EmbeddingVector
from comclip.errors import DimensionMismatch

Float64Array = npt.NDArray[np.float64]
VectorLike = EmbeddingVector | npt.ArrayLike


def as_float64(vector: VectorLike) -> Float64Array:
    values = vector.values if isinstance(vector, EmbeddingVector) else vector
    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 1:
        raise DimensionMismatch(f"Expected a 1-D vector, got shape {array.shape}")
    return array


def cosine(a: VectorLike, b: VectorLike) -> float:
    """Cosine similarity clamped to [-1, 1]; exactly 0 if either vector is zero.

    Raises:
        DimensionMismatch: If the vectors differ in length.
    """
    x, y = as_float64(a), as_float64(b)
    if x.shape != y.shape:
        raise DimensionMismatch(f"Cannot compare vectors of dim {x.shape[0]} and {y.shape[0]}")
    norm_x = float(np.linalg.norm(x))
    norm_y = float(np.linalg.norm(y))
    if norm_x == 0.0 or norm_y == 0.0:
        return 0.0
    return float(np.clip(np.dot(x, y) / (norm_x * norm_y), -1.0, 1.0))


def entity_weights(
    similarities: Sequence[float],
    mode: WeightingMode = WeightingMode.SOFTMAX,
    logit_scale: float = 100.0,
) -> list[float]:
    """Turn per-entity similarities into weights.

    Softmax mode computes ``exp(scale * S_k) / sum_j exp(scale * S_j)`` with
    max-subtraction; raw mode returns the similarities unchanged. An empty
    input yields an empty list.

    Raises:
        ValueError: If any similarity is non-finite or ``logit_scale`` <= 0.
    """
    sims = np.asarray(similarities, dtype=np.float64)
    if sims.size == 0:
        return []
    if not np.all(np.isfinite(sims)):
        raise ValueError(f"Similarities must be finite, got {sims.tolist()}")
    if WeightingMode(mode) is WeightingMode.RAW_SIMILARITY:
        return [float(s) for s in sims]
    if logit_scale <= 0:
        raise ValueError(f"logit_scale must be > 0, got {logit_scale}")

    logits = logit_scale * sims
    exp = np.exp(logits - logits.max())
    return [float(w) for w in exp / exp.sum()]


def compose_visual(
    global_emb: VectorLike, sub_embs: Sequence[VectorLike], weights: Sequence[float]
) -> Float64Array:
    """``V = global + sum_k weights[k] * sub_embs[k]``, not renormalized.

    Raises:
        DimensionMismatch: If lengths of ``sub_embs`` and ``weights`` differ, or a
            subimage embedding's dimension differs from the global one.
    """
    if len(sub_embs) != len(weights):
        raise DimensionMismatch(f"{len(sub_embs)} subimage embeddings but {len(weights)} weights")
    composed = as_float64(global_emb).copy()
    for sub, weight in zip(sub_embs, weights, strict=True):
        values = as_float64(sub)
        if values.shape != composed.shape:
            raise DimensionMismatch(
                f"Subimage embedding dim {values.shape[0]} != global dim {composed.shape[0]}"
            )
        composed += weight * values
    return composed


class ComposedScore(NamedTuple):
    similarities: list[float]
    weights: list[float]
    composed: Float64Array
    score: float


def compose(
    text_emb: VectorLike,
    global_emb: VectorLike,
    word_embs: Sequence[VectorLike],
    sub_embs: Sequence[VectorLike],
    mode: WeightingMode = WeightingMode.SOFTMAX,
    logit_scale: float = 100.0,
) -> ComposedScore:
    """Score one image-sentence pair from its embeddings.

    Each entity word is compared with its own subimage, all K similarities go
    through one joint weighting, and the final score is the cosine between the
    sentence embedding and the composed visual feature.
    """
    if len(word_embs) != len(sub_embs):
        raise DimensionMismatch(f"{len(word_embs)} entity words but {len(sub_embs)} subimages")
    similarities = [cosine(w, s) for w, s in zip(word_embs, sub_embs, strict=True)]
    weights = entity_weights(similarities, mode, logit_scale)
    composed = compose_visual(global_emb, sub_embs, weights)
    return ComposedScore(similarities, weights, composed, cosine(text_emb, composed))


def entity_only_score(
    text_emb: VectorLike, global_emb: VectorLike, word_embs: Sequence[VectorLike]
) -> float:
    """Mean cosine of each entity word against the whole image.

    With no entity words the sentence embedding stands in, which makes the
    result the baseline score.
    """
    if not word_embs:
        return cosine(text_emb, global_emb)
    return float(np.mean([cosine(w, global_emb) for w in word_embs]))
