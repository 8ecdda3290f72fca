"""Entity-to-region alignment over dense captions.

`ground_entities` asks an aligner which captions refer to each subject and
object entity and collects the matched boxes. Predicate entities are never
aligned: their regions are the union of their subject and object regions.
"""

import asyncio
import logging
import re
from typing import Protocol

from comclip.clients.base import LLMClient
from comclip.grounding.models import DenseCaption, GroundedEntity, GroundingMap
from comclip.parsing.models import Entity, Role
from comclip.prompts import get_prompt, parse_json_reply

logger = logging.getLogger(__name__)

MATCH_PROMPT = "match_entity"

_TOKEN_RE = re.compile(r"[a-z]+(?:'[a-z]+)?")

_IRREGULAR_PLURALS: dict[str, str] = {
    "man": "men",
    "woman": "women",
    "person": "people",
    "child": "children",
    "foot": "feet",
    "mouse": "mice",
    "tooth": "teeth",
    "goose": "geese",
}
_IRREGULAR_SINGULARS = {plural: singular for singular, plural in _IRREGULAR_PLURALS.items()}


def caption_tokens(text: str) -> list[str]:
    """Lowercase word tokens; punctuation and digits are dropped."""
    return _TOKEN_RE.findall(text.lower())


def word_variants(word: str) -> set[str]:
    """``word`` plus its singular and plural forms."""
    variants = {word}
    if word in _IRREGULAR_PLURALS:
        variants.add(_IRREGULAR_PLURALS[word])
    if word in _IRREGULAR_SINGULARS:
        variants.add(_IRREGULAR_SINGULARS[word])

    if word.endswith("ies") and len(word) > 3:
        variants.add(word[:-3] + "y")
    elif word.endswith("es") and len(word) > 2:
        variants.update({word[:-2], word[:-1]})
    elif word.endswith("s") and not word.endswith("ss") and len(word) > 1:
        variants.add(word[:-1])

    if word.endswith("y") and word[-2:-1] not in "aeiou":
        variants.add(word[:-1] + "ies")
    elif word.endswith(("s", "sh", "ch", "x", "z")):
        variants.add(word + "es")
    else:
        variants.add(word + "s")
    return variants


class Aligner(Protocol):
    """Selects the captions that refer to an entity."""

    async def match(
        self, entity: Entity, captions: list[DenseCaption], sentence: str
    ) -> list[int]:
        """Indices into ``captions`` that refer to ``entity``."""
        ...


class LexicalAligner:
    """Offline aligner: the entity's head word (or its singular/plural) must be a caption token."""

    def __repr__(self) -> str:
        return "LexicalAligner()"

    async def match(
        self, entity: Entity, captions: list[DenseCaption], sentence: str = ""
    ) -> list[int]:
        return self.match_sync(entity, captions)

    def match_sync(self, entity: Entity, captions: list[DenseCaption]) -> list[int]:
        words = entity.word.split()
        if not words:
            return []
        variants = word_variants(words[-1])
        return [i for i, c in enumerate(captions) if variants & set(caption_tokens(c.text))]


class LLMAligner:
    """
    Asks an LLM which numbered captions refer to the entity.

    The model answers ``{"labels": [<1-based numbers>]}``; numbers outside the
    caption list are ignored. Any failure falls back to `LexicalAligner`.
    """

    def __init__(self, client: LLMClient) -> None:
        self._client = client
        self._lexical = LexicalAligner()
        self.fallback_count = 0

    def __repr__(self) -> str:
        return f"LLMAligner(client={self._client!r})"

    async def match(
        self, entity: Entity, captions: list[DenseCaption], sentence: str = ""
    ) -> list[int]:
        if not captions:
            return []
        labels = "\n".join(f"{i}. {c.text}" for i, c in enumerate(captions, start=1))
        prompt = get_prompt(MATCH_PROMPT).render(
            sentence=sentence, entity=entity.word, labels=labels
        )
        try:
            reply = parse_json_reply(await self._client.complete(prompt, 256))
            raw = reply.get("labels")
            if not isinstance(raw, list):
                raise ValueError(f"Reply has no 'labels' list: {reply}")
            picked = sorted({int(n) - 1 for n in raw})
        except Exception as exc:
            self.fallback_count += 1
            logger.warning(
                "LLM alignment failed for %r (%s: %s); using lexical match",
                entity.word,
                type(exc).__name__,
                exc,
            )
            return self._lexical.match_sync(entity, captions)
        return [i for i in picked if 0 <= i < len(captions)]


async def ground_entities(
    entities: list[Entity],
    captions: list[DenseCaption],
    aligner: Aligner | None = None,
    sentence: str = "",
) -> GroundingMap:
    """Map subject and object entities to the boxes of the captions that refer to them.

    Entities with no matching caption go to ``unmatched``; predicate entities
    are skipped entirely. Duplicate boxes are collapsed, order preserved.
    """
    aligner = aligner or LexicalAligner()
    entries: list[GroundedEntity] = []
    unmatched: list[Entity] = []

    targets = [e for e in dict.fromkeys(entities) if e.role != Role.PREDICATE]
    matches: list[list[int]]
    if captions:
        matches = await asyncio.gather(*(aligner.match(e, captions, sentence) for e in targets))
    else:
        matches = [[] for _ in targets]

    for entity, indices in zip(targets, matches, strict=True):
        if not indices:
            unmatched.append(entity)
            continue
        boxes = list(dict.fromkeys(captions[i].box for i in indices))
        entries.append(
            GroundedEntity(entity=entity, boxes=boxes, captions=[captions[i].text for i in indices])
        )

    logger.debug("Grounded %d entities, %d unmatched", len(entries), len(unmatched))
    return GroundingMap(entries=entries, unmatched=unmatched)
