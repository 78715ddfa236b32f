"""Deterministic text embeddings.

A hashed character-3-gram bag projected to a fixed dimension and
L2-normalized. Identical text always yields a bitwise-identical vector,
across runs and platforms, which is what makes golden tests and the
end-to-end determinism contract possible. External embedding providers
can be plugged in behind the same call signature (minus determinism).
"""

from __future__ import annotations

import zlib

import numpy as np

from ..errors import EmptyText

EMBED_DIM = 256


def _normalize(text: str) -> str:
    return " ".join(text.lower().split())


def embed(text: str, dim: int = EMBED_DIM) -> np.ndarray:
    """Embed text as a unit-norm float64 vector of length ``dim``."""
    normalized = _normalize(text)
    if not normalized:
        raise EmptyText("cannot embed empty text")
    padded = f" {normalized} "
    counts = np.zeros(dim, dtype=np.float64)
    for i in range(len(padded) - 2):
        gram = padded[i : i + 3]
        counts[zlib.crc32(gram.encode("utf-8")) % dim] += 1.0
    norm = float(np.linalg.norm(counts))
    return counts / norm


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of two unit vectors, clamped against float drift."""
    return float(np.clip(np.dot(u, v), -1.0, 1.0))
