"""Adapter for an external memory backend speaking the harness wire format.

Forwards /remember and /search verbatim to a configured base URL, so a
real product can be swapped in behind the same endpoints.
"""

from __future__ import annotations

from datetime import date

import httpx

from ..errors import BackendUnavailable
from .records import MemoryRecord, SearchResult


class ExternalBackend:
    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self._client = httpx.Client(base_url=self.base_url, timeout=timeout)

    def remember(self, speaker: str, text: str, dia_id: str, session_date: date) -> list[str]:
        payload = {
            "speaker": speaker,
            "text": text,
            "dia_id": dia_id,
            "session_date": session_date.isoformat(),
        }
        try:
            resp = self._client.post("/remember", json=payload)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"external /remember failed: {exc}") from exc
        return list(resp.json()["ids"])

    def search(self, query: str, k: int) -> list[SearchResult]:
        try:
            resp = self._client.post("/search", json={"query": query, "k": k})
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"external /search failed: {exc}") from exc
        results = []
        for i, row in enumerate(resp.json()["results"]):
            record = MemoryRecord(
                id=row.get("id", f"x{i}"),
                text=row["text"],
                date=date.fromisoformat(row["date"]),
                speaker=row.get("speaker", ""),
                source_dia_id=row.get("dia_id", ""),
            )
            results.append(SearchResult(record=record, score=float(row["score"])))
        return results

    def close(self) -> None:
        self._client.close()
