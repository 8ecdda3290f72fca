"""Unit tests for rule-based triplet extraction and the parsed-sentence models."""

import pytest
from pydantic import ValidationError

from comclip.errors import EmptySentence, NoTripleFound, ParseError, ParserUnavailable
from comclip.parsing import (
    Entity,
    EntityTriple,
    ParsedSentence,
    ParserSource,
    Role,
    RuleBasedParser,
    entities_of,
    parse_svo_rule_based,
)
from comclip.parsing.rule_based import DEFAULT_MODEL, extract_triplets, load_pipeline


class TestExtraction:
    """Triplets read off the dependency parse of typical captions."""

    @pytest.mark.parametrize(
        ("sentence", "expected"),
        [
            ("A boy rides a horse", ("boy", "rides", "horse")),
            ("A woman buys fruit", ("woman", "buys", "fruit")),
            ("A girl eats an apple", ("girl", "eats", "apple")),
            ("A woman reads a book", ("woman", "reads", "book")),
            ("A man throws a frisbee", ("man", "throws", "frisbee")),
            ("The dog chases the cat", ("dog", "chases", "cat")),
        ],
    )
    def test_transitive_verb_yields_triplet(self, sentence, expected):
        """A verb with a nominal subject and object always gives at least one triplet."""
        subject, predicate, obj = expected

        parsed = parse_svo_rule_based(sentence)

        assert EntityTriple(subject=subject, predicate=predicate, object=obj) in parsed.triplets

    def test_stop_word_preposition_is_dropped(self):
        """'sits on' keeps only the verb, since 'on' is a stop word."""
        parsed = parse_svo_rule_based("A cat sits on a table")

        assert parsed.triplets == [EntityTriple(subject="cat", predicate="sits", object="table")]

    def test_auxiliary_is_skipped(self):
        parsed = parse_svo_rule_based("A man is hitting a baseball")

        assert parsed.triplets == [
            EntityTriple(subject="man", predicate="hitting", object="baseball")
        ]

    def test_participle_takes_the_noun_it_modifies_as_subject(self):
        triplets = extract_triplets("a dog chasing a ball")

        assert triplets == [EntityTriple(subject="dog", predicate="chasing", object="ball")]

    def test_preposition_on_a_noun_is_a_head(self):
        parsed = parse_svo_rule_based("a mug in some grass")

        assert parsed.triplets == [EntityTriple(subject="mug", predicate="in", object="grass")]

    def test_multiword_preposition_is_kept_whole(self):
        parsed = parse_svo_rule_based("a horse standing in front of a fence")

        assert EntityTriple(
            subject="horse", predicate="standing in front of", object="fence"
        ) in parsed.triplets

    def test_compound_nouns_stay_together(self):
        triplets = extract_triplets("a woman near a fruit stand")

        assert triplets == [EntityTriple(subject="woman", predicate="near", object="fruit stand")]

    def test_case_does_not_matter(self):
        assert extract_triplets("A MAN IS HITTING A BASEBALL") == extract_triplets(
            "a man is hitting a baseball"
        )

    def test_no_stop_word_reaches_an_entity(self):
        parsed = parse_svo_rule_based("A man is hitting a baseball on the field")

        words = {w for triplet in parsed.triplets for e in triplet.entities() for w in e.word.split()}
        assert not words & {"a", "the", "is", "on"}

    def test_deterministic(self):
        sentence = "Two dogs chase a ball near a tree"

        assert extract_triplets(sentence) == extract_triplets(sentence)


class TestPipeline:
    """Loading the spaCy pipeline."""

    def test_pipeline_is_loaded_once(self):
        assert load_pipeline(DEFAULT_MODEL) is load_pipeline(DEFAULT_MODEL)

    def test_missing_pipeline_is_a_backend_error(self):
        with pytest.raises(ParserUnavailable, match="not installed") as exc_info:
            parse_svo_rule_based("A cat sits on a table", model="xx_no_such_pipeline")

        assert exc_info.value.exit_code == 3

    def test_parser_object_carries_model(self):
        assert RuleBasedParser("en_core_web_sm").model == "en_core_web_sm"
        assert repr(RuleBasedParser()) == f"RuleBasedParser(model={DEFAULT_MODEL!r})"


class TestFailures:
    """Blank input and sentences without structure."""

    @pytest.mark.parametrize("sentence", ["", "   ", "\n\t"])
    def test_blank_sentence_raises(self, sentence: str):
        with pytest.raises(EmptySentence):
            parse_svo_rule_based(sentence)

    def test_no_structure_raises(self):
        with pytest.raises(NoTripleFound, match="No subject-predicate-object"):
            parse_svo_rule_based("a red apple")

    def test_errors_are_parse_errors(self):
        with pytest.raises(ParseError):
            parse_svo_rule_based("sunset")

    @pytest.mark.asyncio
    async def test_parser_object_matches_function(self):
        parsed = await RuleBasedParser().parse("A cat sits on a table")

        assert parsed == parse_svo_rule_based("A cat sits on a table")
        assert parsed.source is ParserSource.RULE_BASED


class TestEntities:
    """Entity derivation, ordering and deduplication."""

    def test_entities_follow_sentence_order(self):
        parsed = ParsedSentence(
            raw_text="Several people stand near a food cart on a city street",
            triplets=[
                EntityTriple(subject="food cart", predicate="on", object="city street"),
                EntityTriple(subject="people", predicate="stand near", object="food cart"),
            ],
            source=ParserSource.RULE_BASED,
        )

        assert entities_of(parsed) == [
            ("people", Role.SUBJECT),
            ("stand near", Role.PREDICATE),
            ("food cart", Role.SUBJECT),
            ("food cart", Role.OBJECT),
            ("on", Role.PREDICATE),
            ("city street", Role.OBJECT),
        ]

    def test_entities_are_deduplicated(self):
        triplet = EntityTriple(subject="dog", predicate="chasing", object="ball")
        parsed = ParsedSentence(
            raw_text="a dog chasing a ball", triplets=[triplet, triplet], source="llm"
        )

        assert len(parsed.entities) == 3
        assert len(set(parsed.entities)) == len(parsed.entities)

    def test_order_does_not_depend_on_triplet_order(self):
        a = EntityTriple(subject="people", predicate="stand near", object="food cart")
        b = EntityTriple(subject="food cart", predicate="on", object="city street")
        text = "people stand near a food cart on a city street"

        forward = ParsedSentence(raw_text=text, triplets=[a, b], source="llm")
        backward = ParsedSentence(raw_text=text, triplets=[b, a], source="llm")

        assert forward.entities == backward.entities

    def test_entity_compares_to_plain_tuple(self):
        assert Entity("cat", Role.SUBJECT) == ("cat", "subject")

    def test_empty_parse_has_no_entities(self):
        parsed = ParsedSentence(raw_text="sunset", source=ParserSource.RULE_BASED)

        assert parsed.entities == []

    def test_inconsistent_entities_rejected(self):
        triplet = EntityTriple(subject="dog", predicate="chasing", object="ball")

        with pytest.raises(ValidationError, match="deduplicated entity set"):
            ParsedSentence(
                raw_text="a dog chasing a ball",
                triplets=[triplet],
                entities=[Entity("cat", Role.SUBJECT)],
                source="llm",
            )


class TestEntityTriple:
    """Normalization of triplet words."""

    def test_lowercases_and_strips_articles(self):
        triplet = EntityTriple(subject="The Dog", predicate="Chasing", object="a  Ball")

        assert (triplet.subject, triplet.predicate, triplet.object) == ("dog", "chasing", "ball")

    def test_article_only_word_rejected(self):
        with pytest.raises(ValidationError):
            EntityTriple(subject="the", predicate="on", object="table")

    def test_extra_fields_forbidden(self):
        with pytest.raises(ValidationError):
            EntityTriple.model_validate(
                {"subject": "dog", "predicate": "chasing", "object": "ball", "adverb": "fast"}
            )
