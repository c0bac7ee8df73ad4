from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
import requests

from utils import (
    RngStreams,
    StageTimer,
    StreamPurpose,
    as_generator,
    cached_path,
    download_file,
    fingerprint,
    is_remote,
    parse_seed_list,
    split_comma,
    stream,
)

TEST_TIMEOUT_SECONDS = 1


class DummyResponse:
    def __init__(self, status_code: int, chunks: list[bytes] | None = None) -> None:
        self.status_code = status_code
        self._chunks = chunks or []

    def __enter__(self) -> DummyResponse:
        return self

    def __exit__(self, exc_type: object, exc: object, traceback: object) -> None:
        return None

    def iter_content(self, chunk_size: int) -> list[bytes]:
        del chunk_size
        return self._chunks


def test_download_file_hides_url_on_request_exception(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    secret_url = "https://example.com/edges.txt?token=super-secret-token"
    destination = tmp_path / "edges.txt"

    def fake_get(url: str, stream: bool, timeout: int) -> DummyResponse:
        del stream, timeout
        raise requests.Timeout(f"timed out for {url}")

    monkeypatch.setattr("utils.requests.get", fake_get)

    expected = r"Dataset download error: provider=files: request_error=Timeout"
    with pytest.raises(RuntimeError, match=expected) as exc_info:
        download_file(
            secret_url,
            destination,
            TEST_TIMEOUT_SECONDS,
            error_context="Dataset download error: provider=files",
        )

    assert secret_url not in str(exc_info.value)
    assert "super-secret-token" not in str(exc_info.value)


def test_download_file_hides_url_on_http_error(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    secret_url = "https://example.com/edges.txt?token=super-secret-token"

    def fake_get(url: str, stream: bool, timeout: int) -> DummyResponse:
        del url, stream, timeout
        return DummyResponse(status_code=401)

    monkeypatch.setattr("utils.requests.get", fake_get)

    with pytest.raises(RuntimeError, match=r"Dataset download error: provider=files: status_code=401") as exc_info:
        download_file(
            secret_url,
            tmp_path / "edges.txt",
            TEST_TIMEOUT_SECONDS,
            error_context="Dataset download error: provider=files",
        )

    assert "super-secret-token" not in str(exc_info.value)


def test_download_file_writes_non_empty_chunks(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    destination = tmp_path / "edges.txt"

    def fake_get(url: str, stream: bool, timeout: int) -> DummyResponse:
        del url, stream, timeout
        return DummyResponse(status_code=200, chunks=[b"0 1\n", b"", b"1 2\n"])

    monkeypatch.setattr("utils.requests.get", fake_get)

    download_file("https://example.com/edges.txt", destination, TEST_TIMEOUT_SECONDS, error_context="ctx")

    assert destination.read_bytes() == b"0 1\n1 2\n"


def test_split_comma_trims_whitespace_and_skips_empty_items() -> None:
    items = tuple(split_comma(" foo, ,  bar ,,\tbaz "))

    assert items == ("foo", "bar", "baz")


def test_split_comma_applies_callback() -> None:
    items = tuple(split_comma(" 3, 5 ", callback=int))

    assert items == (3, 5)


def test_split_comma_preserves_whitespace_when_strip_disabled() -> None:
    items = tuple(split_comma(" foo, ,  bar ", strip=False))

    assert items == (" foo", " ", "  bar ")


def test_parse_seed_list_keeps_order() -> None:
    assert parse_seed_list(" 3, 1,2 ") == (3, 1, 2)


@pytest.mark.parametrize(
    ("value", "reason"),
    [
        ("1,x", "not_an_integer"),
        ("-1", "negative"),
        (" , ", "empty"),
    ],
)
def test_parse_seed_list_rejects_invalid_values(value: str, reason: str) -> None:
    with pytest.raises(ValueError, match=reason):
        parse_seed_list(value)


def test_rng_streams_are_reproducible_and_independent() -> None:
    first = RngStreams(7)
    second = RngStreams(7)

    assert np.array_equal(first.noise.random(5), second.noise.random(5))
    assert not np.array_equal(stream(7, StreamPurpose.NOISE).random(5), stream(7, StreamPurpose.KMEANS).random(5))


def test_rng_stream_is_unaffected_by_other_consumers() -> None:
    untouched = RngStreams(3)
    busy = RngStreams(3)
    busy.negatives.random(1000)

    assert np.array_equal(untouched.kmeans.random(4), busy.kmeans.random(4))


def test_as_generator_passes_generators_through() -> None:
    rng = np.random.default_rng(1)

    assert as_generator(rng) is rng
    assert isinstance(as_generator(5), np.random.Generator)


def test_fingerprint_ignores_key_order() -> None:
    assert fingerprint({"a": 1, "b": [1, 2]}) == fingerprint({"b": [1, 2], "a": 1})
    assert fingerprint({"a": 1}) != fingerprint({"a": 2})


def test_stage_timer_accumulates_and_touches() -> None:
    timer = StageTimer()
    with timer.stage("training"):
        pass
    with timer.stage("training"):
        pass
    timer.touch("spectral")
    timer.merge({"spectral": 0.5})

    assert timer.seconds["training"] >= 0.0
    assert timer.seconds["spectral"] == 0.5


def test_cached_path_is_stable_and_distinct(tmp_path: Path) -> None:
    first = cached_path("https://example.com/a/edges.txt", tmp_path)

    assert first == cached_path("https://example.com/a/edges.txt", tmp_path)
    assert first != cached_path("https://example.com/b/edges.txt", tmp_path)
    assert first.name.endswith("-edges.txt")
    assert first.parent == tmp_path


def test_is_remote_detects_http_locations() -> None:
    assert is_remote("https://example.com/edges.txt")
    assert not is_remote("data/edges.txt")
