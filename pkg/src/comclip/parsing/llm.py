"""LLM-backed triplet extraction with rule-based fallback.

The LLM is asked to analyze the caption's objects and how they connect, and to
answer with ``{"triplets": [...]}``. Any client error, malformed reply or empty
triplet list falls back to the rule-based parser, so parsing a non-empty
sentence never raises.
"""

import logging
import threading

from comclip.clients.base import LLMClient
from comclip.errors import EmptySentence, NoTripleFound
from comclip.parsing.models import EntityTriple, ParsedSentence, ParserSource
from comclip.parsing.rule_based import DEFAULT_MODEL, parse_svo_rule_based
from comclip.prompts import get_prompt, parse_json_reply

logger = logging.getLogger(__name__)

PARSE_PROMPT = "parse_sentence"
_MAX_TOKENS = 512


class _FallbackCounter:
    """Process-wide count of LLM parse fallbacks (thread-safe)."""

    def __init__(self) -> None:
        self._value = 0
        self._lock = threading.Lock()

    def increment(self) -> int:
        with self._lock:
            self._value += 1
            return self._value

    @property
    def value(self) -> int:
        return self._value

    def reset(self) -> None:
        with self._lock:
            self._value = 0


fallback_counter = _FallbackCounter()


def build_parse_prompt(sentence: str) -> str:
    """The exact prompt text sent for ``sentence`` (also the replay fixture key source)."""
    return get_prompt(PARSE_PROMPT).render(sentence=sentence.strip())


def triplets_from_reply(text: str) -> list[EntityTriple]:
    """Parse ``{"triplets": [...]}`` out of an LLM reply.

    Raises:
        ClientResponseError: If the reply holds no JSON object.
        ValueError: If the triplet list is missing, empty or malformed.
    """
    parsed = parse_json_reply(text)
    raw = parsed.get("triplets")
    if not isinstance(raw, list) or not raw:
        raise ValueError(f"Reply has no non-empty 'triplets' list: {parsed}")
    return [EntityTriple.model_validate(item) for item in raw]


def _rule_based_or_empty(sentence: str, model: str) -> ParsedSentence:
    try:
        return parse_svo_rule_based(sentence, model)
    except NoTripleFound:
        return ParsedSentence(raw_text=sentence, triplets=[], source=ParserSource.RULE_BASED)


class LLMParser:
    """
    Parses captions through an `LLMClient`, falling back to the rule-based parser.

    The parser holds no mutable parse state apart from its fallback count and
    can be shared across concurrent tasks; the client bounds in-flight calls.
    """

    source = ParserSource.LLM

    def __init__(self, client: LLMClient, fallback_model: str = DEFAULT_MODEL) -> None:
        self._client = client
        self._fallback_model = fallback_model
        self._fallbacks = 0
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"LLMParser(client={self._client!r})"

    @property
    def fallback_count(self) -> int:
        """Number of sentences this parser had to hand to the rule-based parser."""
        return self._fallbacks

    def _record_fallback(self, sentence: str, reason: str) -> None:
        with self._lock:
            self._fallbacks += 1
        total = fallback_counter.increment()
        logger.warning(
            "LLM parse failed for %r (%s); using rule-based parser (fallbacks so far: %d)",
            sentence,
            reason,
            total,
        )

    async def parse(self, sentence: str) -> ParsedSentence:
        """Parse ``sentence`` with the LLM.

        On fallback the result is the rule-based parse (``source=rule_based``),
        or an empty parse when the rule-based parser finds no triplet.

        Raises:
            EmptySentence: If ``sentence`` is blank.
        """
        if not sentence.strip():
            raise EmptySentence("Sentence is empty")

        try:
            reply = await self._client.complete(build_parse_prompt(sentence), _MAX_TOKENS)
            triplets = triplets_from_reply(reply)
        except Exception as exc:
            self._record_fallback(sentence, f"{type(exc).__name__}: {exc}")
            return _rule_based_or_empty(sentence, self._fallback_model)

        return ParsedSentence(raw_text=sentence, triplets=triplets, source=ParserSource.LLM)


async def parse_svo_llm(sentence: str, client: LLMClient) -> ParsedSentence:
    """One-shot LLM parse of ``sentence``; see `LLMParser.parse`."""
    return await LLMParser(client).parse(sentence)
