"""Exception types shared across the harness."""


class MemharnessError(Exception):
    """Base class for all harness errors."""


class MalformedCorpus(MemharnessError):
    """Corpus document does not follow the expected conversation layout."""


class DateParseError(MalformedCorpus):
    """A session date string could not be parsed."""


class EmptyText(MemharnessError):
    """Text input was empty after trimming."""


class BackendUnavailable(MemharnessError):
    """A memory backend could not be reached or is not initialized."""


class ExtractionError(MemharnessError):
    """Fact or triple extraction failed for a turn."""


class BindError(MemharnessError):
    """A proxy could not bind its listen endpoint."""


class ProviderTimeout(MemharnessError):
    """An LLM provider did not respond in time."""


class ProviderHTTPError(MemharnessError):
    """An LLM provider returned a non-success HTTP status."""

    def __init__(self, status: int, detail: str = ""):
        self.status = status
        super().__init__(f"provider returned HTTP {status}: {detail}")


class MissingSamples(MemharnessError):
    """A component has too few telemetry samples inside a phase window."""


class MissingPrice(MemharnessError):
    """No token price configured for a model seen in usage totals."""

    def __init__(self, model: str):
        self.model = model
        super().__init__(f"no token price configured for model {model!r}")


class InvalidCounts(MemharnessError):
    """Success/trial counts are out of range for a statistical routine."""
