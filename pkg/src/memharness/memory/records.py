"""Shared record types for the memory backends."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from urllib.parse import urlparse

import numpy as np


@dataclass
class MemoryRecord:
    id: str
    text: str
    date: date
    speaker: str
    source_dia_id: str
    embedding: np.ndarray | None = None


@dataclass(frozen=True)
class SearchResult:
    record: MemoryRecord
    score: float


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str
    date: date


@dataclass(frozen=True)
class BackendKind:
    """One of ``vector``, ``graph`` or ``external`` (with a base URL)."""

    name: str
    url: str | None = None

    def __post_init__(self):
        if self.name not in ("vector", "graph", "external"):
            raise ValueError(f"unknown backend kind: {self.name!r}")
        if self.name == "external":
            parsed = urlparse(self.url or "")
            if parsed.scheme not in ("http", "https") or not parsed.netloc:
                raise ValueError(f"external backend needs a well-formed url, got {self.url!r}")
        elif self.url is not None:
            raise ValueError(f"{self.name} backend takes no url")

    @classmethod
    def vector(cls) -> "BackendKind":
        return cls("vector")

    @classmethod
    def graph(cls) -> "BackendKind":
        return cls("graph")

    @classmethod
    def external(cls, url: str) -> "BackendKind":
        return cls("external", url=url)


def format_memories(results: list[SearchResult]) -> str:
    """Render search results one per line as ``[YYYY-MM-DD] <text>``."""
    return "\n".join(f"[{r.record.date.isoformat()}] {r.record.text}" for r in results)
