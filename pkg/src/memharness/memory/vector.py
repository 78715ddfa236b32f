"""In-memory vector store.

Facts are embedded with the deterministic embedder and ranked by cosine
similarity mapped onto [0, 1]. Duplicate facts are stored again rather
than deduplicated: repeated statements show up as repeated memory lines,
mirroring what retrieval actually returns at scale.
"""

from __future__ import annotations

import json
import threading
from datetime import date
from pathlib import Path

import numpy as np

from .embedding import embed
from .extract import extract_facts
from .records import MemoryRecord, SearchResult


class VectorStore:
    def __init__(self, extractor=extract_facts):
        self._extractor = extractor
        self._records: list[MemoryRecord] = []
        self._matrix: np.ndarray | None = None
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> list[MemoryRecord]:
        return list(self._records)

    def remember(self, speaker: str, text: str, dia_id: str, session_date: date) -> list[str]:
        """Extract facts from one turn, embed and upsert them; returns ids."""
        facts = self._extractor(text, speaker)
        if not facts:
            return []
        vectors = [embed(fact) for fact in facts]
        with self._lock:
            ids = []
            for fact, vec in zip(facts, vectors):
                rid = f"v{len(self._records)}"
                self._records.append(
                    MemoryRecord(
                        id=rid,
                        text=fact,
                        date=session_date,
                        speaker=speaker,
                        source_dia_id=dia_id,
                        embedding=vec,
                    )
                )
                ids.append(rid)
            stacked = np.stack([r.embedding for r in self._records])
            self._matrix = stacked
        return ids

    def search(self, query: str, k: int) -> list[SearchResult]:
        """Top-k records by (1 + cosine) / 2, ties broken by insertion order."""
        if k < 1:
            raise ValueError("k must be >= 1")
        with self._lock:
            if not self._records:
                return []
            qvec = embed(query)
            scores = (1.0 + self._matrix @ qvec) / 2.0
            scores = np.clip(scores, 0.0, 1.0)
            order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))[:k]
            return [SearchResult(record=self._records[i], score=float(scores[i])) for i in order]

    def snapshot(self, path: str | Path) -> None:
        rows = [
            {
                "id": r.id,
                "text": r.text,
                "date": r.date.isoformat(),
                "speaker": r.speaker,
                "source_dia_id": r.source_dia_id,
            }
            for r in self._records
        ]
        Path(path).write_text(json.dumps(rows, indent=2), encoding="utf-8")
