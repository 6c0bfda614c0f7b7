"""
Tests for logging configuration and formatters.
"""

import json
import logging
import sys
from pathlib import Path

import numpy as np
import pytest

from cleanSpectrum.logging_config import ConsoleFormatter, JSONFormatter, configure_logging, json_default


def make_record(message: str = "trained %d epochs", args=(3,), **extra) -> logging.LogRecord:
    record = logging.LogRecord("cleanSpectrum.network", logging.INFO, __file__, 10, message, args, None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


@pytest.fixture
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield root
    for handler in root.handlers[:]:
        root.removeHandler(handler)
        if handler not in handlers:
            handler.close()
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)
    logging.captureWarnings(False)


class TestJsonDefault:
    """Tests for serializing numpy values in log extras."""

    def test_numpy_values(self):
        assert json_default(np.float64(0.5)) == 0.5
        assert json_default(np.int64(3)) == 3
        assert json_default(np.array([1.0, 2.0])) == [1.0, 2.0]
        assert json_default(Path("a/b")) == "a/b"

    def test_fallback_repr(self):
        assert json_default({1, 2}) == repr({1, 2})


class TestJSONFormatter:
    """Tests for the JSON log formatter."""

    def test_fields(self):
        data = json.loads(JSONFormatter().format(make_record()))
        assert data["message"] == "trained 3 epochs"
        assert data["level"] == "INFO"
        assert data["logger"] == "cleanSpectrum.network"
        assert "timestamp" in data

    def test_extras_with_numpy(self):
        record = make_record(spectrum=np.array([0.5, 1.5]), q=np.float64(0.25))
        data = json.loads(JSONFormatter(include_timestamp=False).format(record))
        assert data["spectrum"] == [0.5, 1.5]
        assert data["q"] == 0.25
        assert "timestamp" not in data

    def test_exception(self):
        try:
            raise ValueError("bad spectrum")
        except ValueError:
            record = logging.LogRecord("x", logging.ERROR, __file__, 1, "failed", (), sys.exc_info())
        data = json.loads(JSONFormatter().format(record))
        assert data["exception"]["type"] == "ValueError"
        assert "bad spectrum" in data["exception"]["traceback"]


class TestConsoleFormatter:
    """Tests for the console formatter."""

    def test_plain_output(self):
        text = ConsoleFormatter(use_colors=False).format(make_record())
        assert "INFO [cleanSpectrum.network] trained 3 epochs" in text
        assert "\033[" not in text


class TestConfigureLogging:
    """Tests for configure_logging."""

    def test_level_and_stderr_handler(self, restore_root_logger):
        configure_logging(level="warning")
        root = restore_root_logger
        assert root.level == logging.WARNING
        assert len(root.handlers) == 1
        assert isinstance(root.handlers[0].formatter, ConsoleFormatter)

    def test_json_output(self, restore_root_logger):
        configure_logging(level=logging.DEBUG, json_output=True)
        assert isinstance(restore_root_logger.handlers[0].formatter, JSONFormatter)

    def test_log_file_is_json(self, tmp_path, restore_root_logger):
        log_file = tmp_path / "logs" / "run.log"
        configure_logging(level="info", log_file=str(log_file))
        logging.getLogger("cleanSpectrum.dataset").info("wrote %d records", 5)
        for handler in restore_root_logger.handlers:
            handler.flush()
        lines = log_file.read_text(encoding="utf-8").splitlines()
        assert json.loads(lines[-1])["message"] == "wrote 5 records"
