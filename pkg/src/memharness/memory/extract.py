"""Deterministic fallback extractors.

The real products drive extraction through LLM prompts; these rule-based
extractors let the whole pipeline run without any model while staying
reproducible enough for golden tests. An LLM-backed extractor can be
plugged in through the same callable signature.
"""

from __future__ import annotations

from ..textutil import (
    normalize_pronouns,
    split_at_first_verb,
    split_sentences,
    words,
)
from .records import Triple

MIN_FACT_WORDS = 3


def extract_facts(text: str, speaker: str) -> list[str]:
    """Sentence-level fact lines, pronoun-normalized to the speaker.

    Sentences shorter than MIN_FACT_WORDS words (greetings, fillers like
    "Ok.") produce nothing.
    """
    facts = []
    for sentence in split_sentences(text):
        normalized = normalize_pronouns(sentence, speaker)
        if len(words(normalized)) >= MIN_FACT_WORDS:
            facts.append(normalized)
    return facts


def extract_triples(text: str, speaker: str, date) -> list[Triple]:
    """Subject-verb-object triples; the speaker fills an absent subject."""
    triples = []
    for sentence in split_sentences(text):
        normalized = normalize_pronouns(sentence, speaker)
        split = split_at_first_verb(normalized)
        if split is None:
            continue
        subject, verb, obj = split
        triples.append(Triple(subject=subject or speaker, predicate=verb, object=obj, date=date))
    return triples
