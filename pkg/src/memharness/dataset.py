"""Conversation corpus parsing.

Corpora arrive as JSON documents in the long-context conversation layout:
a list of records, each holding a ``conversation`` object with
``session_N`` / ``session_N_date_time`` keys plus a sibling Q&A list.
This module decomposes them into conversations, ordered sessions, turns
and question/answer items, and bundles small synthetic fixtures of the
same shape under ``memharness/fixtures/``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import date, datetime, time
from importlib import resources
from pathlib import Path

from .errors import DateParseError, MalformedCorpus

_SESSION_KEY = re.compile(r"^session_(\d+)$")

# "4:04 pm on 20 January, 2023" and a few tolerated variants
_DATE_FORMATS = [
    "%I:%M %p on %d %B, %Y",
    "%H:%M on %d %B, %Y",
    "%d %B, %Y",
    "%d %B %Y",
]


@dataclass(frozen=True)
class Turn:
    speaker: str
    dia_id: str
    text: str


@dataclass(frozen=True)
class Session:
    index: int
    date_time_raw: str
    date: date
    time_of_day: time
    turns: tuple[Turn, ...]


@dataclass(frozen=True)
class Conversation:
    speaker_a: str
    speaker_b: str
    sessions: tuple[Session, ...]


@dataclass(frozen=True)
class QaItem:
    question: str
    expected_answer: str
    category: int | None = None


@dataclass(frozen=True)
class Corpus:
    conversations: tuple[tuple[Conversation, tuple[QaItem, ...]], ...]


def normalize_date(raw: str) -> date:
    """Return the calendar date of a session timestamp string."""
    return parse_session_datetime(raw).date()


def parse_session_datetime(raw: str) -> datetime:
    """Parse a session timestamp; missing time of day defaults to 00:00."""
    text = " ".join(raw.split())
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    raise DateParseError(f"unparsable session date: {raw!r}")


def _parse_turn(entry: dict, seen_ids: set[str]) -> Turn:
    if not isinstance(entry, dict):
        raise MalformedCorpus(f"turn entry is not an object: {entry!r}")
    speaker = entry.get("speaker", "")
    text = entry.get("text", "")
    dia_id = entry.get("dia_id", "")
    if not speaker or not text:
        raise MalformedCorpus(f"turn {dia_id!r} missing speaker or text")
    if dia_id in seen_ids:
        raise MalformedCorpus(f"duplicate dia_id {dia_id!r}")
    seen_ids.add(dia_id)
    return Turn(speaker=speaker, dia_id=dia_id, text=text)


def _parse_conversation(conv: dict) -> Conversation:
    speaker_a = conv.get("speaker_a", "")
    speaker_b = conv.get("speaker_b", "")
    if not speaker_a or not speaker_b:
        raise MalformedCorpus("conversation missing speaker_a/speaker_b")

    indices = sorted(
        int(m.group(1)) for key in conv if (m := _SESSION_KEY.match(key))
    )
    if not indices:
        raise MalformedCorpus("conversation has no sessions")
    if indices != list(range(1, len(indices) + 1)):
        raise MalformedCorpus(f"session indices not contiguous from 1: {indices}")

    seen_ids: set[str] = set()
    sessions = []
    for idx in indices:
        raw_dt = conv.get(f"session_{idx}_date_time")
        if not raw_dt:
            raise MalformedCorpus(f"session_{idx} has no date_time")
        parsed = parse_session_datetime(raw_dt)
        entries = conv[f"session_{idx}"]
        if not isinstance(entries, list) or not entries:
            raise MalformedCorpus(f"session_{idx} is empty")
        turns = tuple(_parse_turn(e, seen_ids) for e in entries)
        for turn in turns:
            if turn.speaker not in (speaker_a, speaker_b):
                raise MalformedCorpus(
                    f"turn {turn.dia_id!r} spoken by unknown speaker {turn.speaker!r}"
                )
        sessions.append(
            Session(
                index=idx,
                date_time_raw=raw_dt,
                date=parsed.date(),
                time_of_day=parsed.time(),
                turns=turns,
            )
        )
    return Conversation(speaker_a=speaker_a, speaker_b=speaker_b, sessions=tuple(sessions))


def _parse_qa(items: list, conv_label: str) -> tuple[QaItem, ...]:
    parsed = []
    for entry in items:
        if not isinstance(entry, dict):
            raise MalformedCorpus(f"{conv_label}: QA entry is not an object")
        question = entry.get("question", "")
        if not question:
            raise MalformedCorpus(f"{conv_label}: QA entry missing question")
        answer = entry.get("answer", "")
        category = entry.get("category")
        if category is not None:
            category = int(category)
        parsed.append(QaItem(question=question, expected_answer=str(answer), category=category))
    return tuple(parsed)


def parse_corpus(raw, qa_key: str = "qa") -> Corpus:
    """Parse a corpus document (JSON text, a parsed list, or one record).

    Unknown keys are ignored. Raises :class:`MalformedCorpus` on a missing
    conversation object, non-contiguous session indices, empty sessions or
    an unparsable date.
    """
    if isinstance(raw, (str, bytes)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedCorpus(f"invalid JSON: {exc}") from exc
    if isinstance(raw, dict):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        raise MalformedCorpus("corpus must hold at least one conversation record")

    conversations = []
    for i, record in enumerate(raw):
        if not isinstance(record, dict) or "conversation" not in record:
            raise MalformedCorpus(f"record {i} has no conversation object")
        conv = _parse_conversation(record["conversation"])
        qa = _parse_qa(record.get(qa_key, []) or [], f"record {i}")
        conversations.append((conv, qa))
    return Corpus(conversations=tuple(conversations))


def load_corpus(path: str | Path, qa_key: str = "qa") -> Corpus:
    return parse_corpus(Path(path).read_text(encoding="utf-8"), qa_key=qa_key)


def serialize_corpus(corpus: Corpus, qa_key: str = "qa") -> list:
    """Inverse of :func:`parse_corpus`; re-parsing the result round-trips."""
    records = []
    for conv, qa in corpus.conversations:
        conv_obj: dict = {"speaker_a": conv.speaker_a, "speaker_b": conv.speaker_b}
        for session in conv.sessions:
            conv_obj[f"session_{session.index}_date_time"] = session.date_time_raw
            conv_obj[f"session_{session.index}"] = [
                {"speaker": t.speaker, "dia_id": t.dia_id, "text": t.text}
                for t in session.turns
            ]
        record = {"conversation": conv_obj, qa_key: []}
        for item in qa:
            entry = {"question": item.question, "answer": item.expected_answer}
            if item.category is not None:
                entry["category"] = item.category
            record[qa_key].append(entry)
        records.append(record)
    return records


def turns_in_order(conv: Conversation) -> list[tuple[Session, Turn]]:
    """All turns of a conversation, sessions in index order, file order kept."""
    return [(session, turn) for session in conv.sessions for turn in session.turns]


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture file, e.g. ``fixture_path("mini.json")``."""
    return Path(resources.files("memharness").joinpath("fixtures", name))


def load_fixture(name: str = "mini.json") -> Corpus:
    return load_corpus(fixture_path(name))
