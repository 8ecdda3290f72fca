"""Rule-based subject-predicate-object extraction over a spaCy dependency parse.

The caption is lowercased and parsed with a small English pipeline. Triplets
are then read off the dependency tree:

1. A verb with a nominal subject and a direct object yields
   (subject, verb, object). The subject is an ``nsubj``/``nsubjpass`` child,
   or the noun a participle or relative clause modifies ("a man riding a
   horse").
2. A verb's prepositional object yields (subject, verb + preposition, object).
   When the verb already has a direct object, the preposition relates that
   object instead.
3. A noun's prepositional attachment yields (noun, preposition, object), as
   in "a mug in some grass".

Stop words are masked from the words attached to a head: determiners,
auxiliaries, particles and stop-word prepositions never reach an entity, so
"sits on" reduces to "sits" while "stand near" keeps its preposition. A
preposition that is the whole predicate is kept, as are the multiword forms
"in front of", "on top of", "next to" and "close to".
"""

import logging
from collections.abc import Iterator
from functools import cache

import spacy
from spacy.language import Language
from spacy.tokens import Token

from comclip.errors import EmptySentence, NoTripleFound, ParserUnavailable
from comclip.parsing.models import EntityTriple, ParsedSentence, ParserSource
from comclip.parsing.stopwords import is_stop_word

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "en_core_web_sm"

_NOMINAL_POS = frozenset({"NOUN", "PROPN"})
_SUBJECT_DEPS = frozenset({"nsubj", "nsubjpass"})
_OBJECT_DEPS = frozenset({"dobj", "obj", "attr", "oprd"})
_MODIFIER_DEPS = frozenset({"compound", "amod"})
_CLAUSE_DEPS = frozenset({"acl", "relcl"})

# "in front of" / "on top of" parse as prep -> pobj(front) -> prep(of) -> pobj.
_PREP_NOUNS = frozenset({"front", "top"})
# "next to" / "close to" parse as advmod(next) -> prep(to) -> pobj.
_PREP_ADVERBS = frozenset({"next", "close"})
# Partitives ("a cup of coffee", "a group of people") are not relations.
_NON_RELATION_PREPS = frozenset({"of"})

type Slots = tuple[str, str, str]


@cache
def load_pipeline(model: str = DEFAULT_MODEL) -> Language:
    """The spaCy pipeline ``model``, loaded once per process.

    Raises:
        ParserUnavailable: If the pipeline package is not installed.
    """
    try:
        nlp = spacy.load(model, disable=["ner"])
    except OSError as e:
        raise ParserUnavailable(
            f"spaCy pipeline {model!r} is not installed (python -m spacy download {model})"
        ) from e
    logger.debug("Loaded spaCy pipeline %s %s", model, nlp.meta.get("version", ""))
    return nlp


def _is_content(token: Token) -> bool:
    return token.is_alpha and not is_stop_word(token.lower_)


def _with_conjuncts(tokens: list[Token]) -> list[Token]:
    """``tokens`` plus their nominal conjuncts ("a cat and a dog"), in sentence order."""
    seen = {t.i: t for t in tokens}
    for token in tokens:
        for conj in token.conjuncts:
            if conj.pos_ in _NOMINAL_POS:
                seen.setdefault(conj.i, conj)
    return [seen[i] for i in sorted(seen)]


def _noun_phrase(noun: Token) -> str:
    """The noun with its compound and adjective modifiers, stop words masked."""
    words = [t for t in noun.lefts if t.dep_ in _MODIFIER_DEPS and _is_content(t)]
    words.append(noun)
    return " ".join(t.lower_ for t in words)


def _subjects(verb: Token) -> list[Token]:
    found = [c for c in verb.children if c.dep_ in _SUBJECT_DEPS and c.pos_ in _NOMINAL_POS]
    if not found and verb.dep_ in _CLAUSE_DEPS and verb.head.pos_ in _NOMINAL_POS:
        found = [verb.head]
    if not found and verb.dep_ == "conj" and verb.head.pos_ == "VERB":
        return _subjects(verb.head)
    return _with_conjuncts(found)


def _direct_objects(verb: Token) -> list[Token]:
    return _with_conjuncts(
        [c for c in verb.children if c.dep_ in _OBJECT_DEPS and c.pos_ in _NOMINAL_POS]
    )


def _prep_objects(prep: Token) -> list[Token]:
    return _with_conjuncts(
        [c for c in prep.children if c.dep_ == "pobj" and c.pos_ in _NOMINAL_POS]
    )


def _prepositions(head: Token) -> Iterator[tuple[list[str], bool, Token]]:
    """(preposition words, is multiword, object) for each prepositional attachment of ``head``."""
    for child in head.children:
        if child.dep_ == "prep":
            for pobj in _prep_objects(child):
                inner = [g for g in pobj.children if g.dep_ == "prep" and g.lower_ == "of"]
                if pobj.lower_ in _PREP_NOUNS and inner:
                    for of in inner:
                        for obj in _prep_objects(of):
                            yield [child.lower_, pobj.lower_, "of"], True, obj
                else:
                    yield [child.lower_], False, pobj
        elif child.dep_ == "advmod" and child.lower_ in _PREP_ADVERBS:
            for to in child.children:
                if to.dep_ == "prep" and to.lower_ == "to":
                    for obj in _prep_objects(to):
                        yield [child.lower_, "to"], True, obj


def _verb_triplets(verb: Token) -> Iterator[Slots]:
    subjects = _subjects(verb)
    if not subjects:
        return
    head = [verb.lower_] + [c.lower_ for c in verb.children if c.dep_ == "prt" and _is_content(c)]
    objects = _direct_objects(verb)

    for subj in subjects:
        for obj in objects:
            yield _noun_phrase(subj), " ".join(head), _noun_phrase(obj)

    for prep_words, multiword, pobj in _prepositions(verb):
        if objects:
            # "puts a book on a table": the preposition relates the object.
            yield _noun_phrase(objects[0]), " ".join(prep_words), _noun_phrase(pobj)
            continue
        kept = prep_words if multiword else [w for w in prep_words if not is_stop_word(w)]
        for subj in subjects:
            yield _noun_phrase(subj), " ".join(head + kept), _noun_phrase(pobj)


def _noun_triplets(noun: Token) -> Iterator[Slots]:
    if noun.lower_ in _PREP_NOUNS and noun.dep_ == "pobj":
        return
    for prep_words, _, pobj in _prepositions(noun):
        if prep_words[0] in _NON_RELATION_PREPS:
            continue
        yield _noun_phrase(noun), " ".join(prep_words), _noun_phrase(pobj)


def extract_triplets(sentence: str, model: str = DEFAULT_MODEL) -> list[EntityTriple]:
    """Triplets of ``sentence`` in the order their heads appear, without duplicates.

    Returns an empty list when no verb or noun head has both a subject and
    an object.

    Raises:
        ParserUnavailable: If the spaCy pipeline is not installed.
    """
    doc = load_pipeline(model)(sentence.lower())
    found: dict[Slots, None] = {}
    for token in doc:
        if token.pos_ == "VERB":
            slots = _verb_triplets(token)
        elif token.pos_ in _NOMINAL_POS:
            slots = _noun_triplets(token)
        else:
            continue
        for subject, predicate, obj in slots:
            if subject and predicate and obj:
                found.setdefault((subject, predicate, obj), None)
    return [EntityTriple(subject=s, predicate=p, object=o) for s, p, o in found]


def parse_svo_rule_based(sentence: str, model: str = DEFAULT_MODEL) -> ParsedSentence:
    """Extract subject-predicate-object triplets from a caption.

    Raises:
        EmptySentence: If ``sentence`` is blank.
        NoTripleFound: If the parse has no subject-predicate-object structure.
        ParserUnavailable: If the spaCy pipeline is not installed.
    """
    if not sentence.strip():
        raise EmptySentence("Sentence is empty")

    triplets = extract_triplets(sentence, model)
    if not triplets:
        raise NoTripleFound(f"No subject-predicate-object structure in {sentence!r}")

    logger.debug("Parsed %d triplet(s) from %r", len(triplets), sentence)
    return ParsedSentence(raw_text=sentence, triplets=triplets, source=ParserSource.RULE_BASED)


class RuleBasedParser:
    """Parser object wrapping `parse_svo_rule_based` for one spaCy pipeline."""

    source = ParserSource.RULE_BASED

    def __init__(self, model: str = DEFAULT_MODEL) -> None:
        self.model = model

    async def parse(self, sentence: str) -> ParsedSentence:
        return parse_svo_rule_based(sentence, self.model)

    def __repr__(self) -> str:
        return f"RuleBasedParser(model={self.model!r})"
