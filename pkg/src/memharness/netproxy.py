"""Stream-level TCP forwarding proxy with latency, jitter and bandwidth
toxics.

Sits between agents on loopback (or anywhere) and reproduces a
datacenter-to-edge link: every chunk is delayed by a uniform draw from
[latency - jitter, latency + jitter] and paced through a token bucket.
Delays pipeline rather than stack: a chunk's delivery time is stamped
when it is read, so a burst of chunks shifts by roughly one delay
instead of the sum. Chunk order within a connection is always preserved,
which also keeps every *experienced* delay inside the configured bounds.

Byte streams are never altered, split points aside: checksums in equal
checksums out.
"""

from __future__ import annotations

import asyncio
import json
import random
import threading
from dataclasses import dataclass, field

from .errors import BindError

CHUNK_SIZE = 16 * 1024
DEFAULT_BURST = 64 * 1024

UPSTREAM = "upstream"
DOWNSTREAM = "downstream"
BOTH = "both"


@dataclass(frozen=True)
class ToxicConfig:
    latency_ms: int = 0
    jitter_ms: int = 0
    bandwidth_bytes_per_s: int | None = None  # None = unlimited
    direction: str = BOTH

    def __post_init__(self):
        if self.latency_ms < 0 or self.jitter_ms < 0:
            raise ValueError("latency and jitter must be non-negative")
        if self.jitter_ms > self.latency_ms:
            raise ValueError("jitter must not exceed latency (delay never negative)")
        if self.bandwidth_bytes_per_s is not None and self.bandwidth_bytes_per_s <= 0:
            raise ValueError("bandwidth must be positive or unlimited")
        if self.direction not in (UPSTREAM, DOWNSTREAM, BOTH):
            raise ValueError(f"unknown direction {self.direction!r}")

    @property
    def is_passthrough(self) -> bool:
        return self.latency_ms == 0 and self.jitter_ms == 0 and self.bandwidth_bytes_per_s is None


@dataclass(frozen=True)
class NetworkProfile:
    name: str
    toxic: ToxicConfig

    def __post_init__(self):
        if self.name == "unconstrained" and not self.toxic.is_passthrough:
            raise ValueError("unconstrained profile must be a pass-through")

    @classmethod
    def unconstrained(cls) -> "NetworkProfile":
        return cls(name="unconstrained", toxic=ToxicConfig())

    @classmethod
    def constrained(
        cls,
        latency_ms: int = 200,
        jitter_ms: int = 50,
        bandwidth_bytes_per_s: int | None = 1_000_000,
    ) -> "NetworkProfile":
        return cls(
            name="constrained",
            toxic=ToxicConfig(
                latency_ms=latency_ms,
                jitter_ms=jitter_ms,
                bandwidth_bytes_per_s=bandwidth_bytes_per_s,
            ),
        )

    @classmethod
    def named(cls, name: str) -> "NetworkProfile":
        if name == "unconstrained":
            return cls.unconstrained()
        if name == "constrained":
            return cls.constrained()
        raise ValueError(f"unknown profile {name!r}")


@dataclass
class ProxyStats:
    bytes_up: int = 0
    bytes_down: int = 0
    connections: int = 0
    added_delay_samples_ms: list[float] = field(default_factory=list)

    def snapshot(self) -> dict:
        return {
            "bytes_up": self.bytes_up,
            "bytes_down": self.bytes_down,
            "connections": self.connections,
            "delay_samples": len(self.added_delay_samples_ms),
            "delay_mean_ms": (
                sum(self.added_delay_samples_ms) / len(self.added_delay_samples_ms)
                if self.added_delay_samples_ms
                else 0.0
            ),
        }


def sample_delay_ms(latency_ms: int, jitter_ms: int, rng: random.Random) -> float:
    """One delay draw, uniform on [latency - jitter, latency + jitter]."""
    if latency_ms <= 0:
        return 0.0
    if jitter_ms <= 0:
        return float(latency_ms)
    return rng.uniform(latency_ms - jitter_ms, latency_ms + jitter_ms)


async def apply_latency(chunk: bytes, latency_ms: int, jitter_ms: int, rng: random.Random) -> bytes:
    """Deliver one chunk after a sampled delay."""
    delay = sample_delay_ms(latency_ms, jitter_ms, rng)
    if delay > 0:
        await asyncio.sleep(delay / 1000.0)
    return chunk


class TokenBucket:
    """Async token bucket: over any window, delivered <= rate * dt + burst."""

    def __init__(self, rate_bytes_per_s: int, burst: int = DEFAULT_BURST):
        if rate_bytes_per_s <= 0:
            raise ValueError("rate must be positive")
        self.rate = float(rate_bytes_per_s)
        self.capacity = float(max(burst, CHUNK_SIZE))
        self._tokens = self.capacity
        self._last = None

    def _refill(self, now: float) -> None:
        if self._last is not None:
            self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
        self._last = now

    async def acquire(self, amount: int) -> None:
        loop = asyncio.get_running_loop()
        while True:
            self._refill(loop.time())
            if self._tokens >= amount:
                self._tokens -= amount
                return
            await asyncio.sleep((amount - self._tokens) / self.rate)


async def shape_bandwidth(stream, rate_bytes_per_s: int | None, burst: int = DEFAULT_BURST):
    """Pace an async iterator of byte chunks to a byte rate (None = identity)."""
    if rate_bytes_per_s is None:
        async for chunk in stream:
            yield chunk
        return
    bucket = TokenBucket(rate_bytes_per_s, burst=burst)
    async for chunk in stream:
        await bucket.acquire(len(chunk))
        yield chunk


_EOF = object()


class _Pipe:
    """One direction of a proxied connection: reader -> toxics -> writer."""

    def __init__(self, reader, writer, toxic: ToxicConfig | None, rng, on_bytes, on_delay):
        self.reader = reader
        self.writer = writer
        self.toxic = toxic
        self.rng = rng
        self.on_bytes = on_bytes
        self.on_delay = on_delay
        self.queue: asyncio.Queue = asyncio.Queue()
        self.bucket = (
            TokenBucket(toxic.bandwidth_bytes_per_s)
            if toxic and toxic.bandwidth_bytes_per_s
            else None
        )

    async def _produce(self) -> None:
        loop = asyncio.get_running_loop()
        try:
            while True:
                chunk = await self.reader.read(CHUNK_SIZE)
                if not chunk:
                    break
                self.on_bytes(len(chunk))
                deliver_at = loop.time()
                if self.toxic and self.toxic.latency_ms > 0:
                    delay = sample_delay_ms(self.toxic.latency_ms, self.toxic.jitter_ms, self.rng)
                    self.on_delay(delay)
                    deliver_at += delay / 1000.0
                await self.queue.put((deliver_at, chunk))
        finally:
            await self.queue.put((0.0, _EOF))

    async def _consume(self) -> None:
        loop = asyncio.get_running_loop()
        while True:
            deliver_at, chunk = await self.queue.get()
            if chunk is _EOF:
                break
            wait = deliver_at - loop.time()
            if wait > 0:
                await asyncio.sleep(wait)
            if self.bucket is not None:
                await self.bucket.acquire(len(chunk))
            self.writer.write(chunk)
            await self.writer.drain()
        if self.writer.can_write_eof():
            try:
                self.writer.write_eof()
            except (ConnectionError, RuntimeError):
                pass

    async def run(self) -> None:
        try:
            await asyncio.gather(self._produce(), self._consume())
        except (ConnectionError, asyncio.IncompleteReadError):
            pass


class ProxyHandle:
    """A running proxy on its own event loop thread."""

    def __init__(
        self,
        listen_host: str,
        listen_port: int,
        target_host: str,
        target_port: int,
        profile: NetworkProfile,
        seed: int = 0,
        admin_port: int | None = None,
    ):
        self.listen_host = listen_host
        self.listen_port = listen_port
        self.target_host = target_host
        self.target_port = target_port
        self.profile = profile
        self.stats = ProxyStats()
        self.admin_port = admin_port
        self._rng = random.Random(seed)
        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread: threading.Thread | None = None
        self._started = threading.Event()
        self._stop_event: asyncio.Event | None = None
        self._bind_error: Exception | None = None

    async def _handle_connection(self, client_reader, client_writer) -> None:
        try:
            target_reader, target_writer = await asyncio.open_connection(
                self.target_host, self.target_port
            )
        except OSError:
            # target unreachable: the client sees a reset
            client_writer.transport.abort()
            return
        self.stats.connections += 1
        toxic = self.profile.toxic

        def up_bytes(n):
            self.stats.bytes_up += n

        def down_bytes(n):
            self.stats.bytes_down += n

        def delay(ms):
            self.stats.added_delay_samples_ms.append(ms)

        up = _Pipe(
            client_reader,
            target_writer,
            toxic if toxic.direction in (UPSTREAM, BOTH) else None,
            self._rng,
            up_bytes,
            delay,
        )
        down = _Pipe(
            target_reader,
            client_writer,
            toxic if toxic.direction in (DOWNSTREAM, BOTH) else None,
            self._rng,
            down_bytes,
            delay,
        )
        try:
            await asyncio.gather(up.run(), down.run())
        finally:
            for writer in (client_writer, target_writer):
                try:
                    writer.close()
                except RuntimeError:
                    pass

    async def _handle_admin(self, reader, writer) -> None:
        try:
            await asyncio.wait_for(reader.readuntil(b"\r\n\r\n"), timeout=5.0)
        except (asyncio.TimeoutError, asyncio.IncompleteReadError):
            writer.close()
            return
        body = json.dumps(self.stats.snapshot()).encode()
        head = (
            b"HTTP/1.1 200 OK\r\ncontent-type: application/json\r\n"
            b"content-length: " + str(len(body)).encode() + b"\r\nconnection: close\r\n\r\n"
        )
        writer.write(head + body)
        await writer.drain()
        writer.close()

    async def _main(self) -> None:
        self._stop_event = asyncio.Event()
        try:
            server = await asyncio.start_server(
                self._handle_connection, self.listen_host, self.listen_port
            )
        except OSError as exc:
            self._bind_error = BindError(f"cannot bind {self.listen_host}:{self.listen_port}: {exc}")
            self._started.set()
            return
        self.listen_port = server.sockets[0].getsockname()[1]
        admin_server = None
        if self.admin_port is not None:
            try:
                admin_server = await asyncio.start_server(
                    self._handle_admin, self.listen_host, self.admin_port
                )
            except OSError as exc:
                self._bind_error = BindError(f"cannot bind admin port {self.admin_port}: {exc}")
                server.close()
                self._started.set()
                return
            self.admin_port = admin_server.sockets[0].getsockname()[1]
        self._started.set()
        await self._stop_event.wait()
        server.close()
        await server.wait_closed()
        if admin_server is not None:
            admin_server.close()
            await admin_server.wait_closed()

    def start(self) -> "ProxyHandle":
        def runner():
            self._loop = asyncio.new_event_loop()
            asyncio.set_event_loop(self._loop)
            try:
                self._loop.run_until_complete(self._main())
            finally:
                self._loop.close()

        self._thread = threading.Thread(target=runner, name="netproxy", daemon=True)
        self._thread.start()
        self._started.wait(timeout=10.0)
        if self._bind_error is not None:
            self._thread.join(timeout=5.0)
            raise self._bind_error
        return self

    def stop(self) -> None:
        if self._loop is None or self._stop_event is None:
            return
        if self._thread is None or not self._thread.is_alive():
            return
        self._loop.call_soon_threadsafe(self._stop_event.set)
        self._thread.join(timeout=10.0)
        self._thread = None

    @property
    def endpoint(self) -> tuple[str, int]:
        return self.listen_host, self.listen_port


def start_proxy(
    listen: tuple[str, int],
    target: tuple[str, int],
    profile: NetworkProfile,
    seed: int = 0,
    admin_port: int | None = None,
) -> ProxyHandle:
    """Start a forwarding proxy; returns a handle exposing stats and stop()."""
    handle = ProxyHandle(
        listen_host=listen[0],
        listen_port=listen[1],
        target_host=target[0],
        target_port=target[1],
        profile=profile,
        seed=seed,
        admin_port=admin_port,
    )
    return handle.start()
