"""Exchange-rate (dollars per token) ingestion from a fixture file or HTTP."""

from __future__ import annotations

import json
import math
import socket
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Union

from .errors import ChainEconError


class FeedError(ChainEconError):
    def __init__(self, source: str, message: str):
        self.source = source
        super().__init__(f"{source}: {message}")


class FeedTimeoutError(FeedError):
    pass


class FeedParseError(FeedError):
    pass


class NonPositiveRateError(FeedError):
    pass


@dataclass(frozen=True)
class HttpSource:
    url: str
    pointer: str = "/rate"
    headers: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not self.pointer:
            raise ValueError("http source needs a non-empty JSON pointer")
        if len(self.headers) > 1:
            raise ValueError("at most one static header pair is supported")

    @property
    def source_id(self) -> str:
        return f"http:{self.url}#{self.pointer}"


@dataclass(frozen=True)
class FixtureSource:
    path: str
    pointer: str | None = None

    @property
    def source_id(self) -> str:
        return f"fixture:{self.path}" + (f"#{self.pointer}" if self.pointer else "")


Source = Union[HttpSource, FixtureSource]


@dataclass(frozen=True)
class FeedConfig:
    source: Source
    cache_ttl: float = 60.0
    timeout: float = 10.0

    def __post_init__(self):
        if self.cache_ttl < 0:
            raise ValueError(f"cache_ttl must be >= 0, got {self.cache_ttl!r}")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout!r}")


@dataclass(frozen=True)
class RateSample:
    e: float
    fetched_at: float
    source_id: str

    def __post_init__(self):
        if not self.e > 0:
            raise NonPositiveRateError(self.source_id, f"rate must be > 0, got {self.e!r}")


def resolve_pointer(doc: Any, pointer: str) -> Any:
    """Resolve an RFC 6901 JSON pointer against a parsed document."""
    if pointer == "":
        return doc
    if not pointer.startswith("/"):
        raise KeyError(f"JSON pointer must start with '/': {pointer!r}")
    for token in pointer[1:].split("/"):
        token = token.replace("~1", "/").replace("~0", "~")
        if isinstance(doc, list):
            if not token.isdigit():
                raise KeyError(f"array index expected, got {token!r}")
            doc = doc[int(token)]
        elif isinstance(doc, dict):
            doc = doc[token]
        else:
            raise KeyError(f"cannot descend into {type(doc).__name__} with {token!r}")
    return doc


def parse_rate(text: str, pointer: str | None, source_id: str) -> float:
    """Read a rate from a bare decimal number or a JSON document."""
    text = text.strip()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        try:
            doc = float(text)
        except ValueError:
            raise FeedParseError(source_id, f"not a number or JSON document: {exc}") from exc
    if pointer is not None:
        try:
            doc = resolve_pointer(doc, pointer)
        except (KeyError, IndexError) as exc:
            raise FeedParseError(source_id, f"pointer {pointer!r} not found: {exc}") from exc
    if isinstance(doc, bool) or not isinstance(doc, (int, float)):
        raise FeedParseError(source_id, f"rate is not a number: {doc!r}")
    rate = float(doc)
    if not math.isfinite(rate) or rate <= 0:
        raise NonPositiveRateError(source_id, f"rate must be > 0, got {rate!r}")
    return rate


def _urllib_get(url: str, headers: dict[str, str], timeout: float) -> str:
    req = urllib.request.Request(url, headers={"Accept": "application/json", **headers})
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return resp.read().decode("utf-8")


@dataclass
class RateFeed:
    """Cached, thread-safe rate source.

    ``transport(url, headers, timeout) -> body`` performs the HTTP GET and can
    be swapped out in tests. ``fetch_count`` counts actual source reads.
    """

    config: FeedConfig
    transport: Callable[[str, dict, float], str] = _urllib_get
    clock: Callable[[], float] = time.time
    fetch_count: int = 0
    _cached: RateSample | None = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def fetch(self) -> RateSample:
        with self._lock:
            now = self.clock()
            if self._cached is not None and now - self._cached.fetched_at <= self.config.cache_ttl:
                return self._cached
            rate = self._read()
            self.fetch_count += 1
            self._cached = RateSample(rate, now, self.config.source.source_id)
            return self._cached

    def _read(self) -> float:
        src = self.config.source
        if isinstance(src, FixtureSource):
            try:
                text = Path(src.path).read_text(encoding="utf-8")
            except OSError as exc:
                raise FeedError(src.source_id, f"cannot read fixture: {exc}") from exc
            return parse_rate(text, src.pointer, src.source_id)
        try:
            body = self.transport(src.url, dict(src.headers), self.config.timeout)
        except (socket.timeout, TimeoutError) as exc:
            raise FeedTimeoutError(src.source_id, f"timed out after {self.config.timeout}s") from exc
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                raise FeedTimeoutError(src.source_id, f"timed out after {self.config.timeout}s") from exc
            raise FeedError(src.source_id, f"request failed: {exc.reason}") from exc
        return parse_rate(body, src.pointer, src.source_id)


_feeds: dict[FeedConfig, RateFeed] = {}
_feeds_lock = threading.Lock()


def fetch_rate(config: FeedConfig) -> RateSample:
    """Fetch through a process-wide feed per config, so the TTL cache is shared."""
    with _feeds_lock:
        feed = _feeds.get(config)
        if feed is None:
            feed = _feeds[config] = RateFeed(config)
    return feed.fetch()


def source_from_string(spec: str, pointer: str | None = None) -> Source:
    """Interpret a command-line rate source: http(s) URL or fixture path.

    HTTP sources default to the pointer ``/rate``; fixtures default to a bare number.
    """
    if spec.startswith(("http://", "https://")):
        return HttpSource(spec, pointer or "/rate")
    return FixtureSource(spec, pointer)
