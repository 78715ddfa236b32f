"""Memory backends: a vector store, a knowledge-graph triple store, and an
adapter that forwards to an external HTTP backend speaking the same wire
format."""

from .embedding import embed, EMBED_DIM
from .records import BackendKind, MemoryRecord, SearchResult, Triple, format_memories
from .vector import VectorStore
from .graph import GraphStore

__all__ = [
    "embed",
    "EMBED_DIM",
    "BackendKind",
    "MemoryRecord",
    "SearchResult",
    "Triple",
    "format_memories",
    "VectorStore",
    "GraphStore",
]
