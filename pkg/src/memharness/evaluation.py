"""Answer scoring and the statistical kernel.

Scoring averages a classical string metric (normalized Levenshtein) with
embedding cosine similarity; refusals are detected by the exact refusal
sentence. The kernel provides Wilson score intervals, pooled
two-proportion z-tests, and the dominance decision that combines cost
ordering with statistical equivalence of accuracies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidCounts
from .memory.embedding import cosine, embed

IDK_SENTENCE = "I don't know based on the given memories."

DEFAULT_THRESHOLD = 0.7
DEFAULT_ALPHA = 0.05
Z_95 = 1.96


@dataclass(frozen=True)
class SimilarityScore:
    string_sim: float
    semantic_sim: float

    @property
    def final(self) -> float:
        return (self.string_sim + self.semantic_sim) / 2.0


class Classification(str, Enum):
    CORRECT = "correct"
    WRONG = "wrong"
    IDK = "idk"


@dataclass(frozen=True)
class AccuracyStats:
    n: int
    correct: int
    wrong: int
    idk: int

    def __post_init__(self):
        if self.correct + self.wrong + self.idk != self.n:
            raise InvalidCounts("correct + wrong + idk must equal n")

    @property
    def accuracy(self) -> float:
        return self.correct / self.n if self.n else 0.0

    @property
    def idk_rate(self) -> float:
        return self.idk / self.n if self.n else 0.0

    @property
    def answer_rate(self) -> float:
        return 1.0 - self.idk_rate


@dataclass(frozen=True)
class ConfidenceInterval:
    low: float
    high: float
    level: float = 0.95


@dataclass(frozen=True)
class ParetoVerdict:
    dominant: str | None
    financial_dominance: bool
    statistical_equivalence: bool
    z: float
    p: float


def _canonical(text: str) -> str:
    return " ".join(text.lower().split())


def levenshtein(a: str, b: str) -> int:
    """Iterative two-row edit distance."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def string_similarity(expected: str, received: str) -> float:
    """1 - normalized edit distance over lowercased, space-collapsed text."""
    a, b = _canonical(expected), _canonical(received)
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def semantic_similarity(expected: str, received: str, embedder=embed) -> float:
    """(1 + cosine) / 2 under the configured embedder."""
    return (1.0 + cosine(embedder(expected), embedder(received))) / 2.0


def similarity(expected: str, received: str, embedder=embed) -> SimilarityScore:
    """Both sub-measures; empty sides score 0 semantically (1 if both empty)."""
    a, b = _canonical(expected), _canonical(received)
    if not a or not b:
        semantic = 1.0 if a == b else 0.0
    else:
        semantic = semantic_similarity(a, b, embedder=embedder)
    return SimilarityScore(string_sim=string_similarity(expected, received), semantic_sim=semantic)


def is_idk(received: str) -> bool:
    return IDK_SENTENCE.lower() in received.strip().lower()


def classify(
    expected: str, received: str, threshold: float = DEFAULT_THRESHOLD
) -> tuple[Classification, SimilarityScore]:
    """Classify an answer; refusal detection wins regardless of similarity."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    score = similarity(expected, received)
    if is_idk(received):
        return Classification.IDK, score
    if score.final >= threshold:
        return Classification.CORRECT, score
    return Classification.WRONG, score


def wilson_ci(k: int, n: int, z: float = Z_95) -> ConfidenceInterval:
    """Wilson score interval for k successes in n trials."""
    if n <= 0 or not 0 <= k <= n:
        raise InvalidCounts(f"invalid counts k={k}, n={n}")
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    radius = z * math.sqrt(p * (1.0 - p) / n + z2 / (4 * n * n)) / denom
    return ConfidenceInterval(low=max(0.0, center - radius), high=min(1.0, center + radius))


def two_prop_z(k1: int, n1: int, k2: int, n2: int) -> tuple[float, float]:
    """Pooled two-proportion z statistic and two-sided p-value.

    No continuity correction. A degenerate pool (all failures or all
    successes) is reported as z = 0, p = 1.
    """
    if n1 <= 0 or n2 <= 0 or not 0 <= k1 <= n1 or not 0 <= k2 <= n2:
        raise InvalidCounts(f"invalid counts ({k1}/{n1}, {k2}/{n2})")
    pooled = (k1 + k2) / (n1 + n2)
    if pooled in (0.0, 1.0):
        return 0.0, 1.0
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    z = (k1 / n1 - k2 / n2) / se
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return z, p


def pareto_decision(
    cost_a: float,
    cost_b: float,
    acc_a_counts: tuple[int, int],
    acc_b_counts: tuple[int, int],
    alpha: float = DEFAULT_ALPHA,
    name_a: str = "A",
    name_b: str = "B",
) -> ParetoVerdict:
    """Dominance decision between systems A and B.

    Under statistical equivalence (p >= alpha) the strictly cheaper system
    dominates. When the accuracy difference is significant, the cheaper
    system dominates only if it is also the significantly more accurate
    one; otherwise a true trade-off is reported (no dominant system).
    """
    if cost_a < 0 or cost_b < 0:
        raise ValueError("costs must be non-negative")
    k_a, n_a = acc_a_counts
    k_b, n_b = acc_b_counts
    z, p = two_prop_z(k_a, n_a, k_b, n_b)
    equivalent = p >= alpha
    if cost_a < cost_b:
        cheaper, cheaper_more_accurate = name_a, z > 0
    elif cost_b < cost_a:
        cheaper, cheaper_more_accurate = name_b, z < 0
    else:
        cheaper, cheaper_more_accurate = None, False

    if cheaper is None:
        dominant = None
    elif equivalent or cheaper_more_accurate:
        dominant = cheaper
    else:
        dominant = None
    return ParetoVerdict(
        dominant=dominant,
        financial_dominance=cheaper is not None,
        statistical_equivalence=equivalent,
        z=z,
        p=p,
    )
