"""LLM provider abstraction.

Ships a fully deterministic mock provider (the default: answers come from
keyword lookup over the supplied memory lines, refusals are the exact
required sentence) and a generic client for any OpenAI-compatible chat
endpoint. Usage accounting shared by the providers and the counting
proxy lives here too.
"""

from __future__ import annotations

import re
import threading
import time
from dataclasses import dataclass, field

from .errors import ProviderHTTPError, ProviderTimeout
from .evaluation import IDK_SENTENCE
from .textutil import content_words, split_at_first_verb, words

MOCK_MODEL_NAME = "mock-answerer"

_TOKEN = re.compile(r"\w+|[^\w\s]")
_MEMORY_LINE_DATE = re.compile(r"^\[\d{4}-\d{2}-\d{2}\]\s*")

# minimum keyword-overlap weight before the mock commits to an answer;
# proper-name matches count double
MOCK_ANSWER_WEIGHT = 2


def estimate_tokens(text: str) -> int:
    """Deterministic token estimate: words plus standalone punctuation."""
    return len(_TOKEN.findall(text))


@dataclass(frozen=True)
class TokenUsage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be non-negative")

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(
            prompt_tokens=self.prompt_tokens + other.prompt_tokens,
            completion_tokens=self.completion_tokens + other.completion_tokens,
        )


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_prompt: str
    model_name: str = MOCK_MODEL_NAME
    temperature: float = 0.0

    def __post_init__(self):
        if not self.system_prompt or not self.user_prompt:
            raise ValueError("prompts must be non-empty")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    usage: TokenUsage
    latency_ms: float = 0.0


def _proper_names(line: str) -> set[str]:
    """Capitalized non-initial tokens, lowered; a cheap proper-noun guess."""
    tokens = words(line)
    return {
        t.lower()
        for t in tokens[1:]
        if t[:1].isupper() and t.lower() in content_words(line)
    }


def parse_responder_prompt(user_prompt: str) -> tuple[list[str], str] | None:
    """Extract (memory lines, question) from a rendered responder prompt."""
    mem_match = re.search(r"MEMORIES:\s*\n", user_prompt)
    q_match = re.search(r"QUESTION:\s*\n", user_prompt)
    if not mem_match or not q_match or q_match.start() < mem_match.end():
        return None
    memory_block = user_prompt[mem_match.end() : q_match.start()]
    tail = user_prompt[q_match.end() :]
    question_lines = []
    for line in tail.splitlines():
        if line.startswith("Answer using ONLY"):
            break
        question_lines.append(line)
    question = "\n".join(question_lines).strip()
    memories = [line.strip() for line in memory_block.splitlines() if line.strip()]
    return memories, question


def mock_answer(memories: list[str], question: str) -> str:
    """Keyword lookup over memory lines.

    Each line scores the question's content words it contains, with
    proper-name matches counted double; below MOCK_ANSWER_WEIGHT the
    answer is the exact refusal sentence. The winning line answers with
    its object phrase (text after the first verb).
    """
    qwords = content_words(question)
    best_line, best_weight = None, 0
    for line in memories:
        text = _MEMORY_LINE_DATE.sub("", line)
        overlap = qwords & content_words(text)
        if not overlap:
            continue
        proper = _proper_names(text)
        weight = sum(2 if w in proper else 1 for w in overlap)
        if weight > best_weight:
            best_line, best_weight = text, weight
    if best_line is None or best_weight < MOCK_ANSWER_WEIGHT:
        return IDK_SENTENCE
    split = split_at_first_verb(best_line)
    if split is None:
        return best_line
    return split[2]


class MockProvider:
    """Deterministic stand-in for a chat model.

    The response is a pure function of (system_prompt, user_prompt, seed):
    prompts in the responder layout get the keyword-lookup answer, anything
    else gets the refusal sentence.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed

    def chat(self, req: ChatRequest) -> ChatResponse:
        start = time.perf_counter()
        parsed = parse_responder_prompt(req.user_prompt)
        if parsed is None:
            text = IDK_SENTENCE
        else:
            memories, question = parsed
            text = mock_answer(memories, question)
        usage = TokenUsage(
            prompt_tokens=estimate_tokens(req.system_prompt) + estimate_tokens(req.user_prompt),
            completion_tokens=estimate_tokens(text),
        )
        return ChatResponse(text=text, usage=usage, latency_ms=(time.perf_counter() - start) * 1000.0)


class OpenAICompatibleProvider:
    """Client for any endpoint speaking the OpenAI chat-completions JSON."""

    def __init__(self, base_url: str, api_key: str = "", model: str = "default", timeout: float = 60.0):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.model = model
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(base_url=self.base_url, headers=headers, timeout=timeout)

    def chat(self, req: ChatRequest) -> ChatResponse:
        import httpx

        payload = {
            "model": req.model_name or self.model,
            "temperature": req.temperature,
            "messages": [
                {"role": "system", "content": req.system_prompt},
                {"role": "user", "content": req.user_prompt},
            ],
        }
        start = time.perf_counter()
        try:
            resp = self._client.post("/chat/completions", json=payload)
        except httpx.TimeoutException as exc:
            raise ProviderTimeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise ProviderHTTPError(0, str(exc)) from exc
        latency_ms = (time.perf_counter() - start) * 1000.0
        if resp.status_code >= 400:
            raise ProviderHTTPError(resp.status_code, resp.text[:200])
        body = resp.json()
        usage = body.get("usage") or {}
        return ChatResponse(
            text=body["choices"][0]["message"]["content"],
            usage=TokenUsage(
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
            ),
            latency_ms=latency_ms,
        )

    def close(self) -> None:
        self._client.close()


@dataclass
class UsageLedger:
    """Thread-safe accumulator of token usage per (phase, component, model)."""

    _totals: dict = field(default_factory=dict)
    unparsed: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def record(self, usage: TokenUsage, phase: str = "", component: str = "", model: str = "") -> None:
        key = (phase, component, model)
        with self._lock:
            self._totals[key] = self._totals.get(key, TokenUsage()) + usage

    def record_unparsed(self) -> None:
        with self._lock:
            self.unparsed += 1

    def total(self, phase: str | None = None, component: str | None = None) -> TokenUsage:
        with self._lock:
            out = TokenUsage()
            for (ph, comp, _), usage in self._totals.items():
                if (phase is None or ph == phase) and (component is None or comp == component):
                    out = out + usage
            return out

    def by_model(self, phase: str | None = None) -> dict[str, TokenUsage]:
        with self._lock:
            out: dict[str, TokenUsage] = {}
            for (ph, _, model), usage in self._totals.items():
                if phase is None or ph == phase:
                    out[model] = out.get(model, TokenUsage()) + usage
            return out
