"""Unit tests for entity-to-region grounding."""

import pytest
from pydantic import ValidationError

from comclip.grounding import Box, DenseCaption, GroundedEntity, GroundingMap
from comclip.grounding.aligner import (
    LexicalAligner,
    caption_tokens,
    ground_entities,
    word_variants,
)
from comclip.parsing import Entity, Role

DOG = Entity("dog", Role.SUBJECT)
CHASING = Entity("chasing", Role.PREDICATE)
BALL = Entity("ball", Role.OBJECT)


def _captions() -> list[DenseCaption]:
    return [
        DenseCaption(text="a brown dog running", box=(0, 0, 20, 20)),
        DenseCaption(text="two dogs", box=(5, 5, 25, 25)),
        DenseCaption(text="a red ball", box=(30, 10, 40, 20)),
        DenseCaption(text="green grass", box=(0, 20, 48, 32)),
    ]


class TestWordVariants:
    @pytest.mark.parametrize(
        ("word", "expected"),
        [
            ("dog", {"dog", "dogs"}),
            ("dogs", {"dog"}),
            ("man", {"men"}),
            ("people", {"person"}),
            ("puppy", {"puppies"}),
            ("puppies", {"puppy"}),
            ("bus", {"buses"}),
        ],
    )
    def test_variants_include_number_forms(self, word, expected):
        variants = word_variants(word)

        assert word in variants
        assert expected <= variants


class TestLexicalAligner:
    """Offline caption matching on the entity's head word."""

    def test_matches_singular_and_plural(self):
        assert LexicalAligner().match_sync(DOG, _captions()) == [0, 1]

    def test_head_word_of_phrase_is_used(self):
        entity = Entity("red ball", Role.OBJECT)

        assert LexicalAligner().match_sync(entity, _captions()) == [2]

    def test_no_match(self):
        assert LexicalAligner().match_sync(Entity("cat", Role.SUBJECT), _captions()) == []


class TestGroundEntities:
    """Building the grounding map."""

    @pytest.mark.asyncio
    async def test_predicates_are_never_aligned(self):
        grounding = await ground_entities([DOG, CHASING, BALL], _captions())

        assert grounding.boxes_for(DOG) == [Box(0, 0, 20, 20), Box(5, 5, 25, 25)]
        assert grounding.boxes_for(BALL) == [Box(30, 10, 40, 20)]
        assert grounding.boxes_for(CHASING) == []
        assert CHASING not in grounding.unmatched

    @pytest.mark.asyncio
    async def test_unmatched_entities_listed(self):
        cat = Entity("cat", Role.SUBJECT)

        grounding = await ground_entities([cat, BALL], _captions())

        assert grounding.unmatched == [cat]
        assert grounding.boxes_for(cat) == []

    @pytest.mark.asyncio
    async def test_no_captions_leaves_everything_unmatched(self):
        grounding = await ground_entities([DOG, CHASING, BALL], [])

        assert grounding.entries == []
        assert grounding.unmatched == [DOG, BALL]

    @pytest.mark.asyncio
    async def test_duplicate_boxes_collapse(self):
        captions = [
            DenseCaption(text="a dog", box=(0, 0, 10, 10)),
            DenseCaption(text="the dog head", box=(0, 0, 10, 10)),
        ]

        grounding = await ground_entities([DOG], captions)

        assert grounding.boxes_for(DOG) == [Box(0, 0, 10, 10)]
        assert grounding.entries[0].captions == ["a dog", "the dog head"]

    @pytest.mark.asyncio
    async def test_json_form(self):
        grounding = await ground_entities([DOG, Entity("cat", Role.OBJECT)], _captions())

        assert grounding.to_json_dict() == {
            "entries": [
                {
                    "word": "dog",
                    "role": "subject",
                    "boxes": [[0, 0, 20, 20], [5, 5, 25, 25]],
                    "captions": ["a brown dog running", "two dogs"],
                }
            ],
            "unmatched": [{"word": "cat", "role": "object"}],
        }


class TestModels:
    """Validation on grounding types."""

    @pytest.mark.parametrize("box", [(5, 0, 5, 10), (0, 10, 10, 2), (-2, 0, 4, 4), (0, -5, 4, 4)])
    def test_degenerate_caption_box_rejected(self, box):
        with pytest.raises(ValidationError):
            DenseCaption(text="x", box=box)

    @pytest.mark.parametrize("box", [(-1, 0, 20, 20), (0, -1, 20, 20), (-1, -1, 49, 33)])
    def test_caption_box_within_tolerance_accepted(self, box):
        """Off-by-one boxes are kept as given; clamping happens when subimages are built."""
        assert DenseCaption(text="a cat", box=box).box == box

    def test_entity_grounded_twice_rejected(self):
        entry = GroundedEntity(entity=DOG, boxes=[Box(0, 0, 1, 1)])

        with pytest.raises(ValidationError, match="grounded only once"):
            GroundingMap(entries=[entry, entry])

    def test_entity_both_grounded_and_unmatched_rejected(self):
        entry = GroundedEntity(entity=DOG, boxes=[Box(0, 0, 1, 1)])

        with pytest.raises(ValidationError, match="must not also be grounded"):
            GroundingMap(entries=[entry], unmatched=[DOG])


class TestCaptionTokens:
    def test_drops_digits_and_punctuation(self):
        assert caption_tokens("2 Dogs, 1 cat!") == ["dogs", "cat"]

    def test_keeps_apostrophes(self):
        assert caption_tokens("the dog's ball") == ["the", "dog's", "ball"]
