"""Inference-cost comparison of baseline and compositional scoring."""

import time
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, Field

from comclip.composition.models import CompositionConfig
from comclip.composition.pipeline import ComposedScorer
from comclip.grounding.images import ImageArray


class OverheadReport(BaseModel):
    """Seconds per scored pair, measured over warm caches."""

    n_pairs: int = Field(..., ge=0)
    repeats: int = Field(..., ge=1)
    baseline_mean_s: float
    baseline_std_s: float
    composed_mean_s: float
    composed_std_s: float

    @property
    def ratio(self) -> float:
        """Composed time over baseline time; inf if the baseline took no measurable time."""
        if self.baseline_mean_s == 0:
            return float("inf")
        return self.composed_mean_s / self.baseline_mean_s


async def measure_overhead(
    scorer: ComposedScorer,
    pairs: Sequence[tuple[ImageArray, str]],
    config: CompositionConfig | None = None,
    repeats: int = 3,
) -> OverheadReport:
    """Time `ComposedScorer.baseline` against `ComposedScorer.score` per pair.

    Every pair is scored once before timing so embeddings, parses and
    groundings come from the memo and cache.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    for image, sentence in pairs:
        await scorer.score(image, sentence, config)

    baseline_times: list[float] = []
    composed_times: list[float] = []
    for _ in range(repeats):
        for image, sentence in pairs:
            start = time.perf_counter()
            await scorer.baseline(image, sentence)
            baseline_times.append(time.perf_counter() - start)

            start = time.perf_counter()
            await scorer.score(image, sentence, config)
            composed_times.append(time.perf_counter() - start)

    def stats(values: list[float]) -> tuple[float, float]:
        return (float(np.mean(values)), float(np.std(values))) if values else (0.0, 0.0)

    baseline_mean, baseline_std = stats(baseline_times)
    composed_mean, composed_std = stats(composed_times)
    return OverheadReport(
        n_pairs=len(pairs),
        repeats=repeats,
        baseline_mean_s=baseline_mean,
        baseline_std_s=baseline_std,
        composed_mean_s=composed_mean,
        composed_std_s=composed_std,
    )
