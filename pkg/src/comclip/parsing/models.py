"""Parsed-sentence models: triplets, entities and their roles."""

import re
from enum import StrEnum
from typing import Any, NamedTuple, Self

from pydantic import BaseModel, Field, field_validator, model_validator

_ARTICLES = frozenset({"a", "an", "the"})
_ROLE_ORDER = {"subject": 0, "predicate": 1, "object": 2}


class Role(StrEnum):
    """Grammatical role an entity plays in a triplet."""

    SUBJECT = "subject"
    OBJECT = "object"
    PREDICATE = "predicate"


class ParserSource(StrEnum):
    """Which parser produced a ParsedSentence."""

    RULE_BASED = "rule_based"
    LLM = "llm"


class Entity(NamedTuple):
    """An entity word (or phrase) and its role. Compares equal to a plain tuple."""

    word: str
    role: Role


def normalize_words(value: str) -> str:
    """Lowercase, collapse whitespace and strip leading articles."""
    words = value.lower().split()
    while words and words[0] in _ARTICLES:
        words = words[1:]
    return " ".join(words)


class EntityTriple(BaseModel):
    """A (subject, predicate, object) triplet extracted from a caption."""

    subject: str = Field(..., min_length=1, description="Subject word or phrase")
    predicate: str = Field(..., min_length=1, description="Predicate word or phrase")
    object: str = Field(..., min_length=1, description="Object word or phrase")

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("subject", "predicate", "object", mode="before")
    @classmethod
    def _normalize(cls, v: Any) -> Any:
        """Normalize so that blank or article-only words fail min_length."""
        if isinstance(v, str):
            return normalize_words(v)
        return v

    def entities(self) -> list[Entity]:
        """The triplet's three entities in subject, predicate, object order."""
        return [
            Entity(self.subject, Role.SUBJECT),
            Entity(self.predicate, Role.PREDICATE),
            Entity(self.object, Role.OBJECT),
        ]


def _first_occurrence(raw_text: str, word: str) -> int:
    """Character offset of `word` in `raw_text`, falling back to its first token."""
    lowered = raw_text.lower()
    match = re.search(rf"\b{re.escape(word)}\b", lowered)
    if match:
        return match.start()
    head = word.split()[0]
    match = re.search(rf"\b{re.escape(head)}\b", lowered)
    return match.start() if match else len(lowered) + 1


def order_entities(raw_text: str, triplets: list[EntityTriple]) -> list[Entity]:
    """Deduplicate triplet entities by (word, role), ordered by first occurrence in `raw_text`.

    Ties (same offset, or words absent from the text) are broken by role order
    and then alphabetically, so the result does not depend on triplet order.
    """
    unique = {entity for triplet in triplets for entity in triplet.entities()}
    return sorted(
        unique,
        key=lambda e: (_first_occurrence(raw_text, e.word), _ROLE_ORDER[e.role], e.word),
    )


class ParsedSentence(BaseModel):
    """A sentence with its extracted triplets and the derived entity set."""

    raw_text: str = Field(..., description="The sentence as given")
    triplets: list[EntityTriple] = Field(default_factory=list, description="Extracted triplets")
    entities: list[Entity] = Field(default_factory=list, description="Deduplicated entities")
    source: ParserSource = Field(..., description="Parser that produced this result")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="before")
    @classmethod
    def _derive_entities(cls, data: Any) -> Any:
        """Fill `entities` from the triplets when not supplied."""
        if isinstance(data, dict) and not data.get("entities"):
            triplets = [
                t if isinstance(t, EntityTriple) else EntityTriple.model_validate(t)
                for t in data.get("triplets", [])
            ]
            data = {
                **data,
                "triplets": triplets,
                "entities": order_entities(data.get("raw_text", ""), triplets),
            }
        return data

    @model_validator(mode="after")
    def _check_entities(self) -> Self:
        expected = order_entities(self.raw_text, self.triplets)
        if list(self.entities) != expected:
            raise ValueError("entities must be the deduplicated entity set of the triplets")
        return self


def entities_of(parsed: ParsedSentence) -> list[Entity]:
    """Stable, duplicate-free (word, role) projection of a parsed sentence."""
    return list(parsed.entities)
