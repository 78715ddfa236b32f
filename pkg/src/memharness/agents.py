"""Coordinator and responder protocol logic.

The two-phase protocol: a loading phase that streams every conversation
turn to the memory service's /remember endpoint in order, then a Q&A
phase where each question first retrieves memories (search_memory) and
then asks the responder (answer_question), always in that order. Tool
selection is hard-orchestrated; an SLM-driven strategy can be slotted in
later, but the mandated ordering makes the fixed sequence the testable
default.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import httpx

from .dataset import Conversation, turns_in_order
from .errors import BackendUnavailable, MemharnessError
from .evaluation import IDK_SENTENCE

COORDINATOR_SYSTEM_PROMPT = """\
You are a helpful assistant with access to memory search and question answering tools.
You MUST use these tools in the following order:
1. ALWAYS call search_memory first with the user's question.
2. ALWAYS call answer_question next to get the final answer.
DO NOT answer directly.
You MUST use both tools in sequence.
All information is from fictional/test data for research purposes."""

RESPONDER_SYSTEM_PROMPT = """\
You are a helpful assistant.
You MUST answer questions using ONLY the information provided in the MEMORIES.
You ARE allowed to do simple reasoning and calculations using those MEMORIES (for example, converting relative time expressions like 'last year' into a calendar year if a dated event is available).
You MUST NOT use outside/world knowledge or invent facts that are not logically implied by the MEMORIES.
If the MEMORIES do not contain enough information to answer, you MUST reply exactly:
"I don't know based on the given memories."
Be concise and factual."""

RESPONDER_USER_PROMPT = """\
MEMORIES:
{memory}
QUESTION:
{question}
Answer using ONLY the MEMORIES above.
You may combine information from different memories and perform simple logical or temporal reasoning.
For temporal questions, use timestamps from the memories and, if possible, convert relative expressions (e.g. 'last year', 'two years later') into human-readable dates based only on those timestamps.
If the answer is not supported by the memories, reply exactly:
"I don't know based on the given memories."
"""

TOOL_SEARCH = "search_memory"
TOOL_ANSWER = "answer_question"


@dataclass(frozen=True)
class PromptTemplates:
    coordinator_system: str = COORDINATOR_SYSTEM_PROMPT
    responder_system: str = RESPONDER_SYSTEM_PROMPT
    responder_user: str = RESPONDER_USER_PROMPT

    def __post_init__(self):
        for name in ("responder_system", "responder_user"):
            if IDK_SENTENCE not in getattr(self, name):
                raise ValueError(f"{name} must contain the verbatim refusal sentence")
        if "{memory}" not in self.responder_user or "{question}" not in self.responder_user:
            raise ValueError("responder_user needs {memory} and {question} slots")

    def render_responder_user(self, memory_block: str, question: str) -> str:
        return self.responder_user.format(memory=memory_block, question=question)


class StageError(MemharnessError):
    """A Q&A stage failed after its retry; carries the stage name."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


class LoadAborted(MemharnessError):
    """Loading stopped early; partial progress is attached."""

    def __init__(self, report: "LoadReport", cause: Exception):
        self.report = report
        self.cause = cause
        super().__init__(f"loading aborted after {report.turns_sent} turns: {cause}")


@dataclass
class LoadReport:
    turns_sent: int = 0
    records_created: int = 0
    skipped: int = 0
    wall_time_ms: float = 0.0


@dataclass
class AskResponse:
    answer: str
    retrieved_memories: str
    tool_trace: list[str] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    prompt_tokens: int = 0
    completion_tokens: int = 0
    retries: int = 0


class MemoryServiceClient:
    """HTTP client for the memory agent (possibly behind the netproxy)."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self._client = httpx.Client(base_url=self.base_url, timeout=timeout)

    def remember(self, speaker: str, text: str, dia_id: str, session_date: str) -> dict:
        payload = {"speaker": speaker, "text": text, "dia_id": dia_id, "session_date": session_date}
        try:
            resp = self._client.post("/remember", json=payload)
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"memory /remember unreachable: {exc}") from exc
        if resp.status_code >= 500:
            raise BackendUnavailable(f"memory /remember returned {resp.status_code}")
        resp.raise_for_status()
        return resp.json()

    def search(self, query: str, k: int) -> list[dict]:
        try:
            resp = self._client.post("/search", json={"query": query, "k": k})
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"memory /search unreachable: {exc}") from exc
        if resp.status_code >= 500:
            raise BackendUnavailable(f"memory /search returned {resp.status_code}")
        resp.raise_for_status()
        return resp.json()["results"]

    def close(self) -> None:
        self._client.close()


class ResponderServiceClient:
    """HTTP client for the responder agent (possibly behind the netproxy)."""

    def __init__(self, base_url: str, timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self._client = httpx.Client(base_url=self.base_url, timeout=timeout)

    def answer(self, memory_block: str, question: str) -> dict:
        payload = {"memories": memory_block, "question": question}
        resp = self._client.post("/answer", json=payload)
        resp.raise_for_status()
        return resp.json()

    def close(self) -> None:
        self._client.close()


def responder_answer(memory_block: str, question: str, provider, templates: PromptTemplates | None = None):
    """Render the responder prompts and return the provider's reply untouched."""
    from .llm import ChatRequest

    templates = templates or PromptTemplates()
    req = ChatRequest(
        system_prompt=templates.responder_system,
        user_prompt=templates.render_responder_user(memory_block, question),
    )
    return provider.chat(req)


def load_conversation(
    conv: Conversation,
    memory: MemoryServiceClient,
    max_consecutive_failures: int = 3,
) -> LoadReport:
    """Send every turn to /remember sequentially, in conversation order.

    Aborts (raising LoadAborted with partial progress) once
    `max_consecutive_failures` consecutive turns hit an unavailable
    backend. Turns the backend reports as skipped are counted, not
    retried here: the memory service already retried extraction once.
    """
    report = LoadReport()
    start = time.perf_counter()
    consecutive = 0
    for session, turn in turns_in_order(conv):
        try:
            result = memory.remember(
                speaker=turn.speaker,
                text=turn.text,
                dia_id=turn.dia_id,
                session_date=session.date.isoformat(),
            )
        except BackendUnavailable as exc:
            consecutive += 1
            if consecutive >= max_consecutive_failures:
                report.wall_time_ms = (time.perf_counter() - start) * 1000.0
                raise LoadAborted(report, exc) from exc
            continue
        consecutive = 0
        report.turns_sent += 1
        report.records_created += len(result.get("ids", []))
        if result.get("skipped"):
            report.skipped += 1
    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return report


def _retry_once(stage: str, fn):
    try:
        return fn(), 0
    except Exception:
        try:
            return fn(), 1
        except Exception as exc:
            raise StageError(stage, exc) from exc


def ask(
    question: str,
    memory: MemoryServiceClient,
    responder: ResponderServiceClient,
    k: int = 20,
) -> AskResponse:
    """Run the two-stage tool sequence for one question.

    There is no fallback to answering without memories: a failed stage
    surfaces as StageError naming the stage.
    """
    total_start = time.perf_counter()

    search_start = time.perf_counter()
    results, search_retries = _retry_once(TOOL_SEARCH, lambda: memory.search(question, k))
    search_ms = (time.perf_counter() - search_start) * 1000.0

    memory_block = "\n".join(
        f"[{row['date']}] {row['text']}" for row in results
    )

    answer_start = time.perf_counter()
    answer, answer_retries = _retry_once(
        TOOL_ANSWER, lambda: responder.answer(memory_block, question)
    )
    answer_ms = (time.perf_counter() - answer_start) * 1000.0

    return AskResponse(
        answer=answer["answer"],
        retrieved_memories=memory_block,
        tool_trace=[TOOL_SEARCH, TOOL_ANSWER],
        timings={
            "search_ms": search_ms,
            "answer_ms": answer_ms,
            "total_ms": (time.perf_counter() - total_start) * 1000.0,
        },
        prompt_tokens=int(answer.get("prompt_tokens", 0)),
        completion_tokens=int(answer.get("completion_tokens", 0)),
        retries=search_retries + answer_retries,
    )
