"""Small lexical helpers shared by the extractors, the graph retrieval
scoring and the mock provider. All rule-based and deterministic."""

from __future__ import annotations

import re

WORD = re.compile(r"[A-Za-z0-9']+")
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")

STOPWORDS = frozenset(
    """a an the is are was were be been being am do does did what who whom whose
    which when where why how of in on at to for from with and or but not no yes
    it its this that these those there here he she they them him his her hers
    their theirs i you we me my your yours our ours us have has had will would
    can could should shall may might about as by so if then than too very
    just s t d ll m re ve don didn isn wasn""".split()
)

# First verb occurrence splits a sentence into subject / predicate / object.
VERBS = frozenset(
    """is are was were has have had adopted adopts likes like liked loves love
    loved ate eats eat started starts moved moves went goes got gets named
    names plays played works worked lives lived visited visits bought buys met
    meets enjoys enjoyed made makes wants wanted feels felt thinks thought
    knows knew teaches taught owns owned grew grows runs ran paints painted
    sings sang wrote writes""".split()
)

_PRONOUN_RULES = [
    (re.compile(r"\bi am\b", re.IGNORECASE), "{speaker} is"),
    (re.compile(r"\bi'm\b", re.IGNORECASE), "{speaker} is"),
    (re.compile(r"\bi've\b", re.IGNORECASE), "{speaker} has"),
    (re.compile(r"\bi'd\b", re.IGNORECASE), "{speaker} would"),
    (re.compile(r"\bi'll\b", re.IGNORECASE), "{speaker} will"),
    (re.compile(r"\bi\b", re.IGNORECASE), "{speaker}"),
    (re.compile(r"\bmy\b", re.IGNORECASE), "{speaker}'s"),
    (re.compile(r"\bmine\b", re.IGNORECASE), "{speaker}'s"),
    (re.compile(r"\bme\b", re.IGNORECASE), "{speaker}"),
]


def words(text: str) -> list[str]:
    """Word tokens, original case, apostrophes kept inside tokens."""
    return WORD.findall(text.replace("_", " "))


def content_words(text: str) -> set[str]:
    """Lowercased word tokens minus stopwords and single letters."""
    return {
        w
        for w in (t.lower().rstrip("'") for t in words(text))
        if len(w) > 1 and w not in STOPWORDS
    }


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_SPLIT.split(text.strip()) if s.strip()]


def normalize_pronouns(sentence: str, speaker: str) -> str:
    """Rewrite first-person references to the speaker's name.

    Purely substitution-based; verb agreement is not repaired.
    """
    out = sentence
    for pattern, replacement in _PRONOUN_RULES:
        out = pattern.sub(replacement.format(speaker=speaker), out)
    return " ".join(out.split())


def split_at_first_verb(sentence: str) -> tuple[str, str, str] | None:
    """Split into (subject, verb, object) at the first lexicon verb.

    Returns None when no verb is found or nothing follows it.
    """
    tokens = words(sentence)
    for i, token in enumerate(tokens):
        if token.lower() in VERBS:
            subject = " ".join(tokens[:i])
            obj = " ".join(tokens[i + 1 :])
            if obj:
                return subject, token.lower(), obj
            return None
    return None
