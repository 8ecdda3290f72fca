"""Frozen English stop-word list used by the rule-based parser.

This is the 179-word English list shipped with NLTK's stopwords corpus, embedded
so that parsing never depends on a corpus download.
"""

STOP_WORDS: frozenset[str] = frozenset(
    """
    i me my myself we our ours ourselves you you're you've you'll you'd your yours
    yourself yourselves he him his himself she she's her hers herself it it's its
    itself they them their theirs themselves what which who whom this that that'll
    these those am is are was were be been being have has had having do does did
    doing a an the and but if or because as until while of at by for with about
    against between into through during before after above below to from up down
    in out on off over under again further then once here there when where why how
    all any both each few more most other some such no nor not only own same so
    than too very s t can will just don don't should should've now d ll m o re ve
    y ain aren aren't couldn couldn't didn didn't doesn doesn't hadn hadn't hasn
    hasn't haven haven't isn isn't ma mightn mightn't mustn mustn't needn needn't
    shan shan't shouldn shouldn't wasn wasn't weren weren't won won't wouldn
    wouldn't
    """.split()
)

# Quantifiers and counts that caption writers put in front of nouns.
QUANTIFIERS: frozenset[str] = frozenset(
    {"several", "many", "another", "every", "one", "two", "three", "four", "five"}
)


def is_stop_word(token: str) -> bool:
    """True for stop words and leading quantifiers."""
    return token in STOP_WORDS or token in QUANTIFIERS
