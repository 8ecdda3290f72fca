"""End-to-end compositional scoring of one image against one sentence.

parse -> ground -> build subimages -> encode -> per-entity similarity ->
joint weighting -> composed visual feature -> final cosine.
"""

import asyncio
import logging
from collections.abc import Mapping, Sequence
from typing import Protocol

from comclip.clients.base import DenseCaptioner
from comclip.composition.models import (
    CompositionConfig,
    CompositionResult,
    EntityRecord,
    SubimageConfig,
)
from comclip.composition.similarity import as_float64, compose, cosine, entity_only_score
from comclip.encoders.base import EmbeddingVector, EncoderBackend, encode_image, encode_text
from comclip.encoders.cache import DEFAULT_MEMO_ENTRIES, SharedResults
from comclip.errors import NoTripleFound
from comclip.grounding.aligner import Aligner, LexicalAligner, ground_entities
from comclip.grounding.images import ImageArray, image_digest
from comclip.grounding.models import (
    Box,
    DenseCaption,
    GroundedEntity,
    GroundingMap,
    Subimage,
    SubimageKind,
)
from comclip.grounding.subimages import (
    DEFAULT_BLUR_RADIUS_FRACTION,
    blank_subimage,
    build_entity_subimage,
    build_predicate_subimage,
    fallback_subimage,
)
from comclip.parsing.models import Entity, ParsedSentence, ParserSource, Role
from comclip.parsing.rule_based import RuleBasedParser

logger = logging.getLogger(__name__)

RegionHints = Mapping[Role, Sequence[Sequence[int]]]
"""Ground-truth regions per role; when given, the captioner and aligner are bypassed."""


class SentenceParser(Protocol):
    async def parse(self, sentence: str) -> ParsedSentence: ...


class ScoringMemo:
    """
    Parses, captions and groundings shared across scoring calls.

    One memo per run lets every ablation config reuse the same parse and
    grounding of a sentence/image pair, so the LLM and captioner are called
    once per unique input. Each table keeps its ``max_entries`` most recently
    used results.
    """

    def __init__(self, max_entries: int | None = DEFAULT_MEMO_ENTRIES) -> None:
        self.parses: SharedResults[str, ParsedSentence] = SharedResults(max_entries)
        self.captions: SharedResults[str, list[DenseCaption]] = SharedResults(max_entries)
        self.groundings: SharedResults[tuple[str, str], GroundingMap] = SharedResults(max_entries)

    def __repr__(self) -> str:
        return (
            f"ScoringMemo(parses={len(self.parses)}, captions={len(self.captions)}, "
            f"groundings={len(self.groundings)})"
        )


def _empty_parse(sentence: str) -> ParsedSentence:
    return ParsedSentence(raw_text=sentence, triplets=[], source=ParserSource.RULE_BASED)


def grounding_from_regions(entities: Sequence[Entity], regions: RegionHints) -> GroundingMap:
    """Ground subject and object entities directly on annotated boxes."""
    entries: list[GroundedEntity] = []
    unmatched: list[Entity] = []
    for entity in dict.fromkeys(entities):
        if entity.role == Role.PREDICATE:
            continue
        boxes = [Box(*(int(v) for v in box)) for box in regions.get(entity.role, [])]
        if boxes:
            entries.append(GroundedEntity(entity=entity, boxes=list(dict.fromkeys(boxes))))
        else:
            unmatched.append(entity)
    return GroundingMap(entries=entries, unmatched=unmatched)


def _predicate_boxes(
    parsed: ParsedSentence, predicate: Entity, grounding: GroundingMap
) -> tuple[list[Box], list[Box]]:
    """Boxes of every subject and object that appear with ``predicate`` in a triplet."""
    subject_boxes: list[Box] = []
    object_boxes: list[Box] = []
    for triplet in parsed.triplets:
        if triplet.predicate != predicate.word:
            continue
        subject_boxes += grounding.boxes_for(Entity(triplet.subject, Role.SUBJECT))
        object_boxes += grounding.boxes_for(Entity(triplet.object, Role.OBJECT))
    return list(dict.fromkeys(subject_boxes)), list(dict.fromkeys(object_boxes))


class ComposedScorer:
    """
    Scores image-sentence pairs by composing entity-level subimage evidence.

    The scorer is safe to share across concurrent tasks: its only mutable
    state is the memo, which shares in-flight work instead of duplicating it.

    Example:
        >>> scorer = ComposedScorer(CachedBackend(MockBackend(dim=64)))
        >>> result = await scorer.score(image, "a cat sits on a table")
        >>> result.final_score
    """

    def __init__(
        self,
        backend: EncoderBackend,
        *,
        parser: SentenceParser | None = None,
        captioner: DenseCaptioner | None = None,
        aligner: Aligner | None = None,
        blur_radius_fraction: float = DEFAULT_BLUR_RADIUS_FRACTION,
        crop_tight: bool = False,
        memo: ScoringMemo | None = None,
    ) -> None:
        """
        Args:
            backend: Image and text encoder.
            parser: Sentence parser; defaults to the rule-based parser.
            captioner: Dense captioner; without one every entity is unmatched
                unless ground-truth regions are passed to `score`.
            aligner: Entity-to-caption aligner; defaults to lexical matching.
            blur_radius_fraction: Blur radius as a fraction of min(height, width).
            crop_tight: Crop subimages to their preserved region.
            memo: Shared parse/caption/grounding memo.
        """
        self.backend = backend
        self.parser: SentenceParser = parser or RuleBasedParser()
        self.captioner = captioner
        self.aligner: Aligner = aligner or LexicalAligner()
        self.blur_radius_fraction = blur_radius_fraction
        self.crop_tight = crop_tight
        self.memo = memo or ScoringMemo()

    def __repr__(self) -> str:
        return (
            f"ComposedScorer(backend={self.backend!r}, parser={self.parser!r}, "
            f"captioner={self.captioner!r}, aligner={self.aligner!r})"
        )

    async def parse(self, sentence: str) -> ParsedSentence:
        """Parse ``sentence``; a sentence without structure yields an empty parse.

        Raises:
            EmptySentence: If ``sentence`` is blank.
        """

        async def _parse() -> ParsedSentence:
            try:
                return await self.parser.parse(sentence)
            except NoTripleFound:
                logger.debug("No triplet in %r; scoring falls back to the baseline", sentence)
                return _empty_parse(sentence)

        return await self.memo.parses.get(sentence, _parse)

    async def captions(self, image: ImageArray) -> list[DenseCaption]:
        if self.captioner is None:
            return []
        captioner = self.captioner
        return await self.memo.captions.get(image_digest(image), lambda: captioner.caption(image))

    async def ground(
        self,
        image: ImageArray,
        parsed: ParsedSentence,
        regions: RegionHints | None = None,
    ) -> GroundingMap:
        """Map the parse's subject and object entities to image regions."""
        if regions is not None:
            return grounding_from_regions(parsed.entities, regions)

        async def _ground() -> GroundingMap:
            captions = await self.captions(image)
            return await ground_entities(
                list(parsed.entities), captions, self.aligner, parsed.raw_text
            )

        return await self.memo.groundings.get((image_digest(image), parsed.raw_text), _ground)

    def build_subimages(
        self,
        image: ImageArray,
        parsed: ParsedSentence,
        grounding: GroundingMap,
        config: CompositionConfig,
    ) -> list[tuple[Entity, Subimage]]:
        """One subimage per participating entity, in entity order.

        Unmatched entities get the original image. The subimage config then
        overrides: ``all_black`` blanks everything, ``all_original`` uses the
        source everywhere, ``<role>_only`` replaces the other roles with the
        source and ``omit_<role>`` drops that role's entities.
        """
        variant = config.subimage_config
        pairs: list[tuple[Entity, Subimage]] = []
        for entity in parsed.entities:
            if entity.role == variant.omitted_role:
                continue
            if variant is SubimageConfig.ALL_BLACK:
                pairs.append((entity, blank_subimage(image)))
                continue
            if variant is SubimageConfig.ALL_ORIGINAL or (
                variant.kept_role is not None and entity.role != variant.kept_role
            ):
                pairs.append((entity, fallback_subimage(image)))
                continue
            pairs.append((entity, self._entity_subimage(image, parsed, grounding, entity, config)))
        return pairs

    def _entity_subimage(
        self,
        image: ImageArray,
        parsed: ParsedSentence,
        grounding: GroundingMap,
        entity: Entity,
        config: CompositionConfig,
    ) -> Subimage:
        if entity.role == Role.PREDICATE:
            subject_boxes, object_boxes = _predicate_boxes(parsed, entity, grounding)
            if not subject_boxes and not object_boxes:
                return fallback_subimage(image)
            return build_predicate_subimage(
                image,
                subject_boxes,
                object_boxes,
                config.fill,
                blur_radius_fraction=self.blur_radius_fraction,
                crop_tight=self.crop_tight,
            )

        boxes = grounding.boxes_for(entity)
        if not boxes:
            return fallback_subimage(image)
        return build_entity_subimage(
            image,
            boxes,
            config.fill,
            kind=SubimageKind(entity.role.value),
            blur_radius_fraction=self.blur_radius_fraction,
            crop_tight=self.crop_tight,
        )

    async def score(
        self,
        image: ImageArray,
        sentence: str,
        config: CompositionConfig | None = None,
        regions: RegionHints | None = None,
    ) -> CompositionResult:
        """Compositional matching score of ``image`` against ``sentence``.

        Raises:
            EmptySentence: If ``sentence`` is blank.
            InvalidBox: If a grounded box exceeds the image.
            BackendUnavailable: If the encoder fails.
        """
        config = config or CompositionConfig()
        parsed = await self.parse(sentence)
        text_emb, global_emb = await asyncio.gather(
            encode_text(self.backend, sentence), encode_image(self.backend, image)
        )
        global_score = cosine(text_emb, global_emb)

        if config.subimage_config.is_entity_only:
            return await self._entity_only(parsed, config, text_emb, global_emb, global_score)

        grounding = await self.ground(image, parsed, regions)
        pairs = self.build_subimages(image, parsed, grounding, config)
        word_embs = list(
            await asyncio.gather(*(encode_text(self.backend, e.word) for e, _ in pairs))
        )
        sub_embs = list(
            await asyncio.gather(*(encode_image(self.backend, s.pixels) for _, s in pairs))
        )

        composed = compose(
            text_emb, global_emb, word_embs, sub_embs, config.weighting_mode, config.logit_scale
        )
        records = tuple(
            EntityRecord(
                word=entity.word,
                role=entity.role,
                similarity=similarity,
                weight=weight,
                word_emb=word_emb,
                kind=subimage.kind,
                subimage_emb=sub_emb,
            )
            for (entity, subimage), word_emb, sub_emb, similarity, weight in zip(
                pairs, word_embs, sub_embs, composed.similarities, composed.weights, strict=True
            )
        )
        return CompositionResult(
            sentence=sentence,
            config=config,
            parsed=parsed,
            text_emb=text_emb,
            global_image_emb=global_emb,
            composed=composed.composed,
            global_score=global_score,
            final_score=composed.score,
            entity_records=records,
        )

    async def _entity_only(
        self,
        parsed: ParsedSentence,
        config: CompositionConfig,
        text_emb: EmbeddingVector,
        global_emb: EmbeddingVector,
        global_score: float,
    ) -> CompositionResult:
        role = config.subimage_config.entity_only_role
        entities = [e for e in parsed.entities if role is None or e.role == role]
        word_embs = list(
            await asyncio.gather(*(encode_text(self.backend, e.word) for e in entities))
        )
        weight = 1.0 / len(entities) if entities else 0.0
        records = tuple(
            EntityRecord(
                word=entity.word,
                role=entity.role,
                similarity=cosine(word_emb, global_emb),
                weight=weight,
                word_emb=word_emb,
            )
            for entity, word_emb in zip(entities, word_embs, strict=True)
        )
        return CompositionResult(
            sentence=parsed.raw_text,
            config=config,
            parsed=parsed,
            text_emb=text_emb,
            global_image_emb=global_emb,
            composed=as_float64(global_emb),
            global_score=global_score,
            final_score=entity_only_score(text_emb, global_emb, word_embs),
            entity_records=records,
        )

    async def baseline(self, image: ImageArray, sentence: str) -> float:
        """cosine(G(sentence), F(image)): the uncomposed score."""
        text_emb, image_emb = await asyncio.gather(
            encode_text(self.backend, sentence), encode_image(self.backend, image)
        )
        return cosine(text_emb, image_emb)


async def comclip_score(
    image: ImageArray,
    sentence: str,
    backend: EncoderBackend,
    *,
    parser: SentenceParser | None = None,
    captioner: DenseCaptioner | None = None,
    aligner: Aligner | None = None,
    config: CompositionConfig | None = None,
    regions: RegionHints | None = None,
) -> CompositionResult:
    """One-shot compositional score; see `ComposedScorer.score`."""
    scorer = ComposedScorer(backend, parser=parser, captioner=captioner, aligner=aligner)
    return await scorer.score(image, sentence, config, regions)


async def baseline_score(image: ImageArray, sentence: str, backend: EncoderBackend) -> float:
    """cosine(encode_text(sentence), encode_image(image))."""
    return await ComposedScorer(backend).baseline(image, sentence)
