"""Sentence parsing: subject-predicate-object triplets and entity sets."""

from comclip.parsing.llm import LLMParser, parse_svo_llm
from comclip.parsing.models import (
    Entity,
    EntityTriple,
    ParsedSentence,
    ParserSource,
    Role,
    entities_of,
)
from comclip.parsing.rule_based import RuleBasedParser, parse_svo_rule_based

__all__ = [
    "Entity",
    "EntityTriple",
    "LLMParser",
    "ParsedSentence",
    "ParserSource",
    "Role",
    "RuleBasedParser",
    "entities_of",
    "parse_svo_llm",
    "parse_svo_rule_based",
]
