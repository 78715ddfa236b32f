"""In-memory knowledge-graph triple store.

Entity nodes are deduplicated case-insensitively; triples keep insertion
order. Retrieval scores a triple by the share of query content words its
entities cover, then expands one hop to triples that share an entity
node with a direct hit (at half the neighbor's score).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from ..textutil import content_words
from .extract import extract_triples
from .records import MemoryRecord, SearchResult, Triple

HOP_DAMPING = 0.5


@dataclass
class _EntityNode:
    name: str
    triple_ids: list[int] = field(default_factory=list)


class GraphStore:
    def __init__(self, extractor=extract_triples, hop_depth: int = 1):
        self._extractor = extractor
        self._hop_depth = hop_depth
        self._triples: list[Triple] = []
        self._entities: dict[str, _EntityNode] = {}  # keyed by casefolded name
        self._sources: list[tuple[str, str]] = []  # (speaker, dia_id) per triple
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._triples)

    @property
    def triples(self) -> list[Triple]:
        return list(self._triples)

    def entity_count(self) -> int:
        return len(self._entities)

    def _node(self, name: str) -> _EntityNode:
        key = name.casefold()
        node = self._entities.get(key)
        if node is None:
            node = _EntityNode(name=name)
            self._entities[key] = node
        return node

    def add_triple(self, triple: Triple, speaker: str = "", dia_id: str = "") -> str:
        with self._lock:
            idx = len(self._triples)
            self._triples.append(triple)
            self._sources.append((speaker, dia_id))
            self._node(triple.subject).triple_ids.append(idx)
            self._node(triple.object).triple_ids.append(idx)
            return f"g{idx}"

    def remember(self, speaker: str, text: str, dia_id: str, session_date: date) -> list[str]:
        triples = self._extractor(text, speaker, session_date)
        return [self.add_triple(t, speaker=speaker, dia_id=dia_id) for t in triples]

    def _record(self, idx: int) -> MemoryRecord:
        triple = self._triples[idx]
        speaker, dia_id = self._sources[idx]
        return MemoryRecord(
            id=f"g{idx}",
            text=f"{triple.subject} {triple.predicate} {triple.object}",
            date=triple.date,
            speaker=speaker,
            source_dia_id=dia_id,
        )

    def search(self, query: str, k: int) -> list[SearchResult]:
        if k < 1:
            raise ValueError("k must be >= 1")
        qwords = content_words(query)
        with self._lock:
            if not self._triples or not qwords:
                return []
            direct: dict[int, float] = {}
            for idx, triple in enumerate(self._triples):
                twords = content_words(triple.subject) | content_words(triple.object)
                overlap = len(qwords & twords)
                if overlap:
                    direct[idx] = overlap / len(qwords)

            scores = dict(direct)
            frontier = direct
            for _ in range(self._hop_depth):
                neighbors: dict[int, float] = {}
                for idx, score in frontier.items():
                    triple = self._triples[idx]
                    for name in (triple.subject, triple.object):
                        for nb in self._entities[name.casefold()].triple_ids:
                            if nb == idx:
                                continue
                            damped = score * HOP_DAMPING
                            if damped > neighbors.get(nb, 0.0):
                                neighbors[nb] = damped
                for idx, score in neighbors.items():
                    if score > scores.get(idx, 0.0):
                        scores[idx] = score
                frontier = neighbors

            order = sorted(scores, key=lambda i: (-scores[i], i))[:k]
            return [SearchResult(record=self._record(i), score=min(scores[i], 1.0)) for i in order]

    def snapshot(self, path: str | Path) -> None:
        rows = [
            {
                "subject": t.subject,
                "predicate": t.predicate,
                "object": t.object,
                "date": t.date.isoformat(),
            }
            for t in self._triples
        ]
        Path(path).write_text(json.dumps(rows, indent=2), encoding="utf-8")
