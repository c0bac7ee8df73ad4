"""Shared utility helpers."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from collections.abc import (
    Callable,
    Generator,
    Iterator,
)
from contextlib import contextmanager
from dataclasses import (
    dataclass,
    field,
)
from enum import IntEnum
from pathlib import Path
from typing import (
    Any,
    overload,
)
from urllib.parse import urlparse

import numpy as np
import requests

logger = logging.getLogger(__name__)


@overload
def split_comma(value: str, *, strip: bool = True, callback: None = None) -> Generator[str, None, None]: ...


@overload
def split_comma[T](value: str, *, strip: bool = True, callback: Callable[[str], T]) -> Generator[T, None, None]: ...


def split_comma[T](
    value: str, *, strip: bool = True, callback: Callable[[str], T] | None = None
) -> Generator[str | T, None, None]:
    """Yield non-empty comma-separated items, optionally stripped and transformed."""
    for item in value.split(","):
        parsed_item = item.strip() if strip else item
        if not parsed_item:
            continue

        if callback is None:
            yield parsed_item
            continue

        yield callback(parsed_item)


def parse_seed_list(value: str) -> tuple[int, ...]:
    """Parse a comma-separated seed list such as `1,2,3`."""

    def parse_seed(item: str) -> int:
        try:
            seed = int(item)
        except ValueError:
            raise ValueError(f"Seed parse error: value={item} reason=not_an_integer") from None
        if seed < 0:
            raise ValueError(f"Seed parse error: value={item} reason=negative")
        return seed

    seeds = tuple(split_comma(value, callback=parse_seed))
    if not seeds:
        raise ValueError("Configuration error: env_var=SDGE_SEED reason=empty")
    return seeds


class StreamPurpose(IntEnum):
    """Independent random streams, one per consumer."""

    INIT = 0
    NOISE = 1
    NEGATIVES = 2
    KMEANS = 3
    DATA = 4


@dataclass(frozen=True)
class RngStreams:
    """Seeded generators that never share state, so one consumer cannot shift another's sequence."""

    seed: int
    init: np.random.Generator = field(init=False)
    noise: np.random.Generator = field(init=False)
    negatives: np.random.Generator = field(init=False)
    kmeans: np.random.Generator = field(init=False)

    def __post_init__(self) -> None:
        """Derive one generator per purpose from the run seed."""
        for purpose in (StreamPurpose.INIT, StreamPurpose.NOISE, StreamPurpose.NEGATIVES, StreamPurpose.KMEANS):
            object.__setattr__(self, purpose.name.lower(), stream(self.seed, purpose))


def stream(seed: int, purpose: StreamPurpose) -> np.random.Generator:
    """Return the generator for one purpose of a seeded run."""
    return np.random.default_rng([seed, int(purpose)])


def as_generator(seed: int | np.random.Generator) -> np.random.Generator:
    """Accept either a ready generator or an integer seed."""
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def fingerprint(payload: dict[str, Any]) -> str:
    """Return a stable SHA256 digest of a JSON-serializable mapping."""
    encoded = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(encoded).hexdigest()


@dataclass
class StageTimer:
    """Accumulates wall-clock seconds per named stage."""

    seconds: dict[str, float] = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Time the enclosed block and add it to the stage total."""
        started_at = time.perf_counter()
        try:
            yield
        finally:
            self.seconds[name] = self.seconds.get(name, 0.0) + time.perf_counter() - started_at

    def touch(self, name: str) -> None:
        """Register a stage that did not run, so reports show it as zero."""
        self.seconds.setdefault(name, 0.0)

    def merge(self, other: dict[str, float]) -> None:
        """Add another timer's totals into this one."""
        for name, value in other.items():
            self.seconds[name] = self.seconds.get(name, 0.0) + value


def is_remote(location: str) -> bool:
    """Return whether a dataset location is an http(s) URL."""
    return urlparse(location).scheme in {"http", "https"}


def cached_path(location: str, cache_dir: Path) -> Path:
    """Map a remote location to a stable file name inside the cache directory."""
    name = Path(urlparse(location).path).name or "download"
    digest = hashlib.sha256(location.encode("utf-8")).hexdigest()[:12]
    return cache_dir / f"{digest}-{name}"


def download_file(url: str, destination: Path, timeout: int, *, error_context: str) -> None:
    """Download a file without leaking request details in errors."""
    started_at = time.perf_counter()
    try:
        with requests.get(url, stream=True, timeout=timeout) as response:
            if response.status_code >= 400:
                raise RuntimeError(f"{error_context}: status_code={response.status_code}")
            with destination.open("wb") as file_obj:
                for chunk in response.iter_content(chunk_size=8192):
                    if chunk:
                        file_obj.write(chunk)
    except requests.RequestException as exc:
        raise RuntimeError(f"{error_context}: request_error={type(exc).__name__}") from None

    elapsed_seconds = time.perf_counter() - started_at
    logger.info("Download result: destination=%s elapsed_seconds=%.3f", destination, elapsed_seconds)
