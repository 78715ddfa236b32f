"""Per-component resource sampling and metrics aggregation.

A background sampler polls registered per-component sources (thread CPU
time, process RSS, byte counters) on a fixed cadence. Aggregation cuts
the sample streams at phase boundaries and reduces them into one row per
(experiment, phase, backend, tier), which is what the CSV artifacts and
the costing step consume.
"""

from __future__ import annotations

import csv
import threading
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import psutil

from .errors import MissingSamples

CLOUD = "cloud"
EDGE = "edge"

DEFAULT_SAMPLE_INTERVAL_S = 1.0


@dataclass(frozen=True)
class ComponentLabel:
    component: str
    tier: str

    def __post_init__(self):
        if self.tier not in (CLOUD, EDGE):
            raise ValueError(f"tier must be cloud or edge, got {self.tier!r}")


@dataclass(frozen=True)
class ResourceSample:
    component: str
    timestamp_ms: float
    cpu_time_ms: float
    ram_bytes: int
    disk_bytes_written: int
    net_bytes: int


@dataclass(frozen=True)
class PhaseWindow:
    phase: str
    start_ms: float
    end_ms: float

    def __post_init__(self):
        if self.end_ms <= self.start_ms:
            raise ValueError("window end must be after start")

    def contains(self, timestamp_ms: float) -> bool:
        return self.start_ms <= timestamp_ms <= self.end_ms


@dataclass
class MetricsRow:
    experiment: str
    phase: str
    backend: str
    tier: str
    cpu_minutes: float
    ram_mb: float
    disk_mb: float
    network_mb: float
    duration_minutes: float
    prompt_tokens: int = 0
    completion_tokens: int = 0
    total_tokens: int = 0
    requests: int = 0
    latency_mean_ms: float = 0.0
    latency_p50_ms: float = 0.0
    latency_p95_ms: float = 0.0
    latency_max_ms: float = 0.0


@dataclass
class MetricsTable:
    rows: list[MetricsRow] = field(default_factory=list)

    def row(self, phase: str, tier: str) -> MetricsRow:
        for row in self.rows:
            if row.phase == phase and row.tier == tier:
                return row
        raise KeyError(f"no row for phase={phase!r}, tier={tier!r}")


def now_ms() -> float:
    return time.monotonic() * 1000.0


class Counters:
    """Flat named counters, rendered as `name value` lines for /metrics."""

    def __init__(self):
        self._values: dict[str, float] = {}
        self._lock = threading.Lock()

    def inc(self, name: str, value: float = 1.0) -> None:
        with self._lock:
            self._values[name] = self._values.get(name, 0.0) + value

    def set(self, name: str, value: float) -> None:
        with self._lock:
            self._values[name] = value

    def get(self, name: str) -> float:
        with self._lock:
            return self._values.get(name, 0.0)

    def snapshot(self) -> dict[str, float]:
        with self._lock:
            return dict(self._values)

    def render(self) -> str:
        snap = self.snapshot()
        return "".join(f"{k} {snap[k]:g}\n" for k in sorted(snap))


class ThreadStatsSource:
    """Stats for a component hosted on one thread of this process.

    CPU time is the thread's own user+system time. RAM is the process
    RSS: in the threaded deployment memory is shared, so per-component
    RAM is reported at process level. Byte counters are supplied by the
    component itself.
    """

    def __init__(self, native_thread_id: int | None = None, net_fn=None, disk_fn=None):
        self._proc = psutil.Process()
        self._tid = native_thread_id
        self._net_fn = net_fn
        self._disk_fn = disk_fn
        self._last_cpu_ms = 0.0

    def __call__(self) -> dict:
        cpu_ms = self._last_cpu_ms
        if self._tid is not None:
            for t in self._proc.threads():
                if t.id == self._tid:
                    cpu_ms = (t.user_time + t.system_time) * 1000.0
                    break
        else:
            cpu = self._proc.cpu_times()
            cpu_ms = (cpu.user + cpu.system) * 1000.0
        # a finished thread disappears from the list; freeze its last value
        self._last_cpu_ms = max(self._last_cpu_ms, cpu_ms)
        return {
            "cpu_time_ms": self._last_cpu_ms,
            "ram_bytes": self._proc.memory_info().rss,
            "disk_bytes_written": int(self._disk_fn()) if self._disk_fn else 0,
            "net_bytes": int(self._net_fn()) if self._net_fn else 0,
        }


class Sampler:
    """Polls all registered sources every `interval_s` seconds."""

    def __init__(self, interval_s: float = DEFAULT_SAMPLE_INTERVAL_S):
        self.interval_s = interval_s
        self._sources: dict[str, object] = {}
        self._samples: list[ResourceSample] = []
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def register(self, component: str, source) -> None:
        self._sources[component] = source

    def sample_once(self) -> None:
        ts = now_ms()
        rows = []
        for component, source in self._sources.items():
            data = source()
            rows.append(
                ResourceSample(
                    component=component,
                    timestamp_ms=ts,
                    cpu_time_ms=float(data["cpu_time_ms"]),
                    ram_bytes=int(data["ram_bytes"]),
                    disk_bytes_written=int(data["disk_bytes_written"]),
                    net_bytes=int(data["net_bytes"]),
                )
            )
        with self._lock:
            self._samples.extend(rows)

    def _run(self) -> None:
        while not self._stop.is_set():
            self.sample_once()
            self._stop.wait(self.interval_s)
        self.sample_once()

    def start(self) -> None:
        self._stop.clear()
        self._thread = threading.Thread(target=self._run, name="telemetry-sampler", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=10.0)
            self._thread = None

    @property
    def samples(self) -> list[ResourceSample]:
        with self._lock:
            return list(self._samples)


def _percentile(sorted_values: list[float], q: float) -> float:
    if not sorted_values:
        return 0.0
    pos = q * (len(sorted_values) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(sorted_values) - 1)
    frac = pos - lo
    return sorted_values[lo] * (1 - frac) + sorted_values[hi] * frac


def aggregate(
    samples: list[ResourceSample],
    windows: list[PhaseWindow],
    labels: list[ComponentLabel],
    experiment: str,
    backend: str,
    ram_mode: str = "peak",
) -> MetricsTable:
    """Reduce raw samples to one row per (phase, tier).

    Per component and window: CPU/disk/network are last-minus-first deltas
    of the cumulative counters, RAM is the in-window peak (or mean, per
    `ram_mode`). Tier cells sum the deltas and average the per-component
    RAM reductions. Raises MissingSamples when a labeled component has
    fewer than two samples inside a window.
    """
    if ram_mode not in ("peak", "mean"):
        raise ValueError("ram_mode must be peak or mean")
    tier_of = {label.component: label.tier for label in labels}
    by_component: dict[str, list[ResourceSample]] = {c: [] for c in tier_of}
    for sample in samples:
        if sample.component in by_component:
            by_component[sample.component].append(sample)

    table = MetricsTable()
    for window in windows:
        per_tier: dict[str, dict] = {
            tier: {"cpu_ms": 0.0, "disk": 0.0, "net": 0.0, "ram": []} for tier in (CLOUD, EDGE)
        }
        for component, history in by_component.items():
            inside = [s for s in sorted(history, key=lambda s: s.timestamp_ms) if window.contains(s.timestamp_ms)]
            if len(inside) < 2:
                raise MissingSamples(
                    f"component {component!r} has {len(inside)} samples in phase {window.phase!r}"
                )
            bucket = per_tier[tier_of[component]]
            bucket["cpu_ms"] += inside[-1].cpu_time_ms - inside[0].cpu_time_ms
            bucket["disk"] += inside[-1].disk_bytes_written - inside[0].disk_bytes_written
            bucket["net"] += inside[-1].net_bytes - inside[0].net_bytes
            ram_values = [s.ram_bytes for s in inside]
            reduced = max(ram_values) if ram_mode == "peak" else sum(ram_values) / len(ram_values)
            bucket["ram"].append(reduced)

        duration_minutes = (window.end_ms - window.start_ms) / 60_000.0
        for tier in (CLOUD, EDGE):
            bucket = per_tier[tier]
            ram_mb = (sum(bucket["ram"]) / len(bucket["ram"]) / 2**20) if bucket["ram"] else 0.0
            table.rows.append(
                MetricsRow(
                    experiment=experiment,
                    phase=window.phase,
                    backend=backend,
                    tier=tier,
                    cpu_minutes=bucket["cpu_ms"] / 60_000.0,
                    ram_mb=ram_mb,
                    disk_mb=bucket["disk"] / 2**20,
                    network_mb=bucket["net"] / 2**20,
                    duration_minutes=duration_minutes,
                )
            )
    return table


METRICS_COLUMNS = [f.name for f in fields(MetricsRow)]

ANSWER_COLUMNS = [
    "question",
    "expected_answer",
    "received_answer",
    "category",
    "classification",
    "string_similarity",
    "semantic_similarity",
    "final_similarity",
    "tool_trace",
]


def emit_csv(
    table: MetricsTable,
    answers: list[dict],
    out_dir: str | Path,
    backend: str,
    profile: str,
) -> list[Path]:
    """Write metrics and answers CSVs; stable column order, UTF-8.

    Answer rows carry no wall-clock fields, so re-emitting the same run
    data produces byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metrics_path = out / f"metrics_{backend}_{profile}.csv"
    answers_path = out / f"answers_{backend}_{profile}.csv"

    with metrics_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for row in table.rows:
            writer.writerow([getattr(row, col) for col in METRICS_COLUMNS])

    with answers_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ANSWER_COLUMNS)
        for row in answers:
            writer.writerow([row[col] for col in ANSWER_COLUMNS])
    return [metrics_path, answers_path]


def read_metrics_csv(path: str | Path) -> MetricsTable:
    """Parse a metrics CSV back into a MetricsTable."""
    table = MetricsTable()
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for record in csv.DictReader(fh):
            kwargs = {}
            for f in fields(MetricsRow):
                raw = record[f.name]
                kwargs[f.name] = raw if f.type == "str" else (int(raw) if f.type == "int" else float(raw))
            table.rows.append(MetricsRow(**kwargs))
    return table
