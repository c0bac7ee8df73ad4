from __future__ import annotations

import logging

import pytest

from logging_config import (
    RFC3339Formatter,
    build_logging_config,
)
from settings import get_settings


def test_build_logging_config_defaults_to_info_when_log_level_is_unset(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("SDGE_LOG_LEVEL", raising=False)
    get_settings.cache_clear()

    config = build_logging_config()

    assert config["root"]["level"] == "INFO"
    assert config["handlers"]["console"]["level"] == "INFO"


def test_build_logging_config_defaults_to_info_when_log_level_is_empty(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("SDGE_LOG_LEVEL", "   ")
    get_settings.cache_clear()

    config = build_logging_config()

    assert config["root"]["level"] == "INFO"


def test_build_logging_config_uses_environment_log_level(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("SDGE_LOG_LEVEL", "debug")
    get_settings.cache_clear()

    config = build_logging_config()

    assert config["root"]["level"] == "DEBUG"
    assert config["handlers"]["console"]["level"] == "DEBUG"


def test_build_logging_config_prefers_explicit_cli_level(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("SDGE_LOG_LEVEL", "debug")
    get_settings.cache_clear()

    config = build_logging_config(" warning ")

    assert config["root"]["level"] == "WARNING"


def test_rfc3339_formatter_renders_offset_timestamp() -> None:
    record = logging.LogRecord("sdge", logging.INFO, __file__, 1, "message", None, None)
    record.created = 0.0

    rendered = RFC3339Formatter().formatTime(record)

    assert "T" in rendered
    assert rendered[-6] in "+-"


def test_build_logging_config_names_thread_and_quiets_http_loggers() -> None:
    config = build_logging_config("debug")

    line_format = config["formatters"]["standard"]["format"]
    assert line_format == "[%(asctime)s] %(levelname)s [%(threadName)s] %(name)s: %(message)s"
    assert config["loggers"]["urllib3"]["level"] == "WARNING"
    assert config["loggers"]["requests"]["level"] == "WARNING"
