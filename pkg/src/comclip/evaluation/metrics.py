"""Benchmark metrics and protocols.

Every comparison is a strict inequality: ties count as incorrect. Scorers are
async callables ``(image_ref, sentence) -> float``; instances are scored
concurrently under a semaphore and aggregated in input order.
"""

import asyncio
import logging
from collections import defaultdict
from collections.abc import Awaitable, Callable, Mapping, Sequence
from typing import Protocol

import numpy as np

from comclip.errors import ComclipError, DataError
from comclip.evaluation.models import (
    EvalReport,
    GroupCount,
    InstanceScore,
    MatchInstance,
    RecallScores,
    RetrievalQuery,
    VLCategory,
    VLChecklistPair,
    WinogroundInstance,
    WinogroundScores,
)
from comclip.parsing.models import ParsedSentence

logger = logging.getLogger(__name__)

Scorer = Callable[[str, str], Awaitable[float]]
"""``await scorer(image_ref, sentence)`` -> matching score."""

DEFAULT_PARALLELISM = 8
RECALL_KS = (1, 5, 10)


class SentenceParser(Protocol):
    async def parse(self, sentence: str) -> ParsedSentence: ...


async def _score_all[T, R](
    items: Sequence[T],
    score_one: Callable[[T], Awaitable[R]],
    item_id: Callable[[T], str],
    *,
    parallelism: int,
    lenient: bool,
) -> tuple[list[tuple[T, R]], list[str]]:
    """Score ``items`` concurrently; returns (item, result) pairs in input order and skipped ids."""
    semaphore = asyncio.Semaphore(max(1, parallelism))

    async def bounded(item: T) -> R | None:
        async with semaphore:
            try:
                return await score_one(item)
            except ComclipError:
                if not lenient:
                    raise
                logger.exception("Skipping instance %r", item_id(item))
                return None

    results = await asyncio.gather(*(bounded(item) for item in items))
    scored = [(item, r) for item, r in zip(items, results, strict=True) if r is not None]
    skipped = [item_id(item) for item, r in zip(items, results, strict=True) if r is None]
    return scored, skipped


def is_correct(pos_score: float, neg_score: float) -> bool:
    """True iff the positive strictly outscores the negative."""
    return pos_score > neg_score


def accuracy_breakdown(
    outcomes: Sequence[tuple[str, bool]],
) -> tuple[float | None, dict[str, GroupCount]]:
    """Overall accuracy and per-group counts from ``(group, correct)`` outcomes."""
    counts: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for group, correct in outcomes:
        counts[group][0] += int(correct)
        counts[group][1] += 1
    overall = sum(c for _, c in outcomes) / len(outcomes) if outcomes else None
    return overall, {g: GroupCount(correct=c, total=t) for g, (c, t) in sorted(counts.items())}


def matching_report(
    instances: Sequence[MatchInstance],
    pos_scores: Sequence[float],
    neg_scores: Sequence[float],
    *,
    dataset: str = "comvg",
    config: str = "full",
    seed: int = 0,
    skipped: Sequence[str] = (),
) -> EvalReport:
    """Accuracy overall and per negative type from precomputed scores."""
    rows = [
        InstanceScore(
            id=inst.id,
            group=str(inst.neg_type),
            scores={"pos": pos, "neg": neg},
            correct=is_correct(pos, neg),
        )
        for inst, pos, neg in zip(instances, pos_scores, neg_scores, strict=True)
    ]
    overall, counts = accuracy_breakdown([(r.group, r.correct) for r in rows])
    return EvalReport(
        dataset=dataset,
        config=config,
        seed=seed,
        n_instances=len(rows),
        overall=overall,
        by_neg_type={g: c.accuracy for g, c in counts.items()},
        counts=counts,
        skipped=list(skipped),
        instance_scores=rows,
    )


async def eval_matching(
    instances: Sequence[MatchInstance],
    scorer: Scorer,
    *,
    dataset: str = "comvg",
    config: str = "full",
    seed: int = 0,
    parallelism: int = DEFAULT_PARALLELISM,
    lenient: bool = False,
) -> EvalReport:
    """Pairwise matching accuracy: correct iff score(pos) > score(neg)."""

    async def score_one(inst: MatchInstance) -> tuple[float, float]:
        pos, neg = await asyncio.gather(
            scorer(inst.pos_image, inst.sentence), scorer(inst.neg_image, inst.sentence)
        )
        return pos, neg

    scored, skipped = await _score_all(
        instances, score_one, lambda i: i.id, parallelism=parallelism, lenient=lenient
    )
    return matching_report(
        [inst for inst, _ in scored],
        [pos for _, (pos, _) in scored],
        [neg for _, (_, neg) in scored],
        dataset=dataset,
        config=config,
        seed=seed,
        skipped=skipped,
    )


def winoground_flags(matrix: Sequence[Sequence[float]]) -> tuple[bool, bool, bool]:
    """(text, image, group) correctness for ``matrix[caption][image]``."""
    (c0i0, c0i1), (c1i0, c1i1) = matrix
    text = c0i0 > c1i0 and c1i1 > c0i1
    image = c0i0 > c0i1 and c1i1 > c1i0
    return text, image, text and image


def winoground_scores(matrices: Sequence[Sequence[Sequence[float]]]) -> WinogroundScores:
    if not matrices:
        return WinogroundScores(text=0.0, image=0.0, group=0.0)
    flags = np.array([winoground_flags(m) for m in matrices], dtype=bool)
    text, image, group = (float(v) for v in flags.mean(axis=0))
    return WinogroundScores(text=text, image=image, group=group)


async def eval_winoground(
    instances: Sequence[WinogroundInstance],
    scorer: Scorer,
    *,
    config: str = "full",
    seed: int = 0,
    parallelism: int = DEFAULT_PARALLELISM,
    lenient: bool = False,
) -> EvalReport:
    """Text, image and group scores over the four caption/image pairings."""

    async def score_one(inst: WinogroundInstance) -> list[list[float]]:
        c0i0, c0i1, c1i0, c1i1 = await asyncio.gather(
            scorer(inst.image_0, inst.caption_0),
            scorer(inst.image_1, inst.caption_0),
            scorer(inst.image_0, inst.caption_1),
            scorer(inst.image_1, inst.caption_1),
        )
        return [[c0i0, c0i1], [c1i0, c1i1]]

    scored, skipped = await _score_all(
        instances, score_one, lambda i: i.id, parallelism=parallelism, lenient=lenient
    )
    rows = []
    for inst, matrix in scored:
        text, image, group = winoground_flags(matrix)
        rows.append(
            InstanceScore(
                id=inst.id,
                scores={
                    "c0_i0": matrix[0][0],
                    "c0_i1": matrix[0][1],
                    "c1_i0": matrix[1][0],
                    "c1_i1": matrix[1][1],
                    "text": float(text),
                    "image": float(image),
                },
                correct=group,
            )
        )
    return EvalReport(
        dataset="winoground",
        config=config,
        seed=seed,
        n_instances=len(rows),
        winoground=winoground_scores([m for _, m in scored]),
        skipped=skipped,
        instance_scores=rows,
    )


async def eval_vl_checklist(
    pairs: Sequence[VLChecklistPair],
    scorer: Scorer,
    *,
    config: str = "full",
    seed: int = 0,
    parallelism: int = DEFAULT_PARALLELISM,
    lenient: bool = False,
) -> EvalReport:
    """Per-category accuracy; ``ave`` is the unweighted mean over the categories present."""

    async def score_one(pair: VLChecklistPair) -> tuple[float, float]:
        pos, neg = await asyncio.gather(
            scorer(pair.image, pair.pos_caption), scorer(pair.image, pair.neg_caption)
        )
        return pos, neg

    scored, skipped = await _score_all(
        pairs, score_one, lambda p: p.id, parallelism=parallelism, lenient=lenient
    )
    rows = [
        InstanceScore(
            id=pair.id,
            group=str(pair.category),
            scores={"pos": pos, "neg": neg},
            correct=is_correct(pos, neg),
        )
        for pair, (pos, neg) in scored
    ]
    overall, counts = accuracy_breakdown([(r.group, r.correct) for r in rows])
    by_category = {g: c.accuracy for g, c in counts.items()}
    if by_category:
        by_category["ave"] = category_average(by_category)
    return EvalReport(
        dataset="vl_checklist",
        config=config,
        seed=seed,
        n_instances=len(rows),
        overall=overall,
        counts=counts,
        by_category=by_category,
        skipped=skipped,
        instance_scores=rows,
    )


def category_average(by_category: Mapping[str, float]) -> float:
    """Unweighted mean of the attribute/object/relation accuracies."""
    categories = {c.value for c in VLCategory}
    values = [v for k, v in by_category.items() if k in categories]
    return float(np.mean(values)) if values else 0.0


def stage_one_ranking(scores: Sequence[float], relevant: int) -> list[int]:
    """Gallery indices by descending score; ties put the relevant item last."""
    return sorted(range(len(scores)), key=lambda j: (-scores[j], j == relevant, j))


def rerank_top_k(
    ranking: Sequence[int], rerank_scores: Mapping[int, float], relevant: int, k: int
) -> list[int]:
    """Re-sort the first ``k`` entries of ``ranking`` by ``rerank_scores``; the tail keeps its order."""
    head = sorted(ranking[:k], key=lambda j: (-rerank_scores[j], j == relevant, j))
    return [*head, *ranking[k:]]


def recall_at_k(ranks: Sequence[int], k: int) -> float:
    """Fraction of 0-based ``ranks`` below ``k``."""
    if not ranks:
        return 0.0
    return sum(1 for r in ranks if r < k) / len(ranks)


async def eval_retrieval(
    queries: Sequence[RetrievalQuery],
    gallery: Sequence[str],
    baseline_scorer: Scorer,
    rerank_scorer: Scorer,
    k_rerank: int = 10,
    *,
    config: str = "full",
    seed: int = 0,
    parallelism: int = DEFAULT_PARALLELISM,
    lenient: bool = False,
) -> EvalReport:
    """Two-stage text-to-image retrieval recall@{1,5,10}.

    Stage one ranks the whole gallery with ``baseline_scorer``; stage two
    re-scores only the top ``k_rerank`` with ``rerank_scorer``.

    Raises:
        DataError: If a query's relevant image is not in the gallery.
    """
    index = {ref: j for j, ref in enumerate(gallery)}
    for query in queries:
        if query.image not in index:
            raise DataError(f"Query {query.id!r}: relevant image {query.image!r} not in gallery")

    async def rank_one(query: RetrievalQuery) -> tuple[int, int]:
        relevant = index[query.image]
        stage_one = await asyncio.gather(*(baseline_scorer(ref, query.caption) for ref in gallery))
        ranking = stage_one_ranking(stage_one, relevant)
        head = ranking[:k_rerank]
        rescored = await asyncio.gather(*(rerank_scorer(gallery[j], query.caption) for j in head))
        final = rerank_top_k(ranking, dict(zip(head, rescored, strict=True)), relevant, k_rerank)
        return ranking.index(relevant), final.index(relevant)

    scored, skipped = await _score_all(
        queries, rank_one, lambda q: q.id, parallelism=parallelism, lenient=lenient
    )
    final_ranks = [final for _, (_, final) in scored]
    rows = [
        InstanceScore(
            id=query.id,
            scores={"stage_one_rank": float(first), "final_rank": float(final)},
            correct=final == 0,
        )
        for query, (first, final) in scored
    ]
    r1, r5, r10 = (recall_at_k(final_ranks, k) for k in RECALL_KS)
    return EvalReport(
        dataset="retrieval",
        config=config,
        seed=seed,
        n_instances=len(rows),
        recall=RecallScores(r1=r1, r5=r5, r10=r10),
        skipped=skipped,
        instance_scores=rows,
    )


async def triplet_agreement(instances: Sequence[MatchInstance], parser: SentenceParser) -> float:
    """Fraction of instances whose first parsed triplet equals the annotated one.

    Sentences the parser cannot structure count as disagreements.
    """
    if not instances:
        return 0.0

    async def agrees(inst: MatchInstance) -> bool:
        try:
            parsed = await parser.parse(inst.sentence)
        except ComclipError:
            return False
        return bool(parsed.triplets) and parsed.triplets[0] == inst.triplet

    results = await asyncio.gather(*(agrees(inst) for inst in instances))
    return sum(results) / len(instances)
