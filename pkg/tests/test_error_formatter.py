"""
Tests for the CLI error formatting helpers.
"""

import pytest

from cleanSpectrum.error_formatter import ErrorFormatter, format_error, get_error_summary, print_error
from cleanSpectrum.errors import (
    ConfigurationError, ConvergenceError, DatasetError, DimensionMismatchError, DivergenceError,
    FileOperationError, PreconditionError, SerializationError
)


@pytest.fixture
def formatter():
    return ErrorFormatter(use_colors=False)


class TestErrorFormatter:
    """Tests for ErrorFormatter.format."""

    def test_precondition_context(self, formatter):
        text = formatter.format(PreconditionError("Noise ratio q out of range", condition="0 < q <= 1"))
        assert text.startswith("ERROR: Precondition Error")
        assert "Condition: 0 < q <= 1" in text
        assert "T >= N" in text

    def test_dimension_mismatch_context(self, formatter):
        text = formatter.format(DimensionMismatchError("bad width", expected=5, actual=4))
        assert "Expected: 5" in text
        assert "Actual: 4" in text
        assert "N+1 inputs" in text

    def test_convergence_residual(self, formatter):
        text = formatter.format(ConvergenceError("Jacobi did not converge", residual=0.00125))
        assert "Residual: 1.250e-03" in text

    def test_divergence_suggestions(self, formatter):
        text = formatter.format(DivergenceError("loss is nan", epoch=3, batch=1))
        assert "Epoch: 3" in text
        assert "Lower the learning rate" in text

    def test_dataset_context(self, formatter):
        text = formatter.format(DatasetError("Redraw budget exhausted", file_path="d.jsonl", record_index=7))
        assert "File: d.jsonl" in text
        assert "Record: 7" in text
        assert "retry budget" in text

    def test_serialization_checksum(self, formatter):
        text = formatter.format(SerializationError("Checksum mismatch", file_path="m.txt"))
        assert "retrain or restore" in text

    def test_configuration_header(self, formatter):
        text = formatter.format(ConfigurationError("Invalid setting dropout"))
        assert text.startswith("ERROR: Configuration Error")
        assert "CLEANSPEC_*" in text

    def test_none_context_skipped(self, formatter):
        text = formatter.format(FileOperationError("No such file"))
        assert "File:" not in text
        assert "Verify the file path" in text

    def test_plain_exception(self, formatter):
        text = formatter.format(KeyError("x"))
        assert text.startswith("ERROR: Python KeyError")
        assert "--log-level debug" in text

    def test_unknown_error(self, formatter):
        assert formatter.format("just text").startswith("ERROR: Unknown Error")

    def test_colors(self):
        text = format_error(ValueError("boom"), use_colors=True)
        assert "\033[1m" in text
        assert "\033[" not in format_error(ValueError("boom"), use_colors=False)


def test_print_error_uses_stderr(capsys):
    print_error(PreconditionError("Spectrum must sum to N"))
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "normalize_spectrum" in captured.err


class TestErrorSummary:
    """Tests for get_error_summary."""

    def test_convergence(self):
        summary = get_error_summary(ConvergenceError("stuck", residual=0.5))
        assert summary["type"] == "ConvergenceError"
        assert summary["residual"] == 0.5
        assert summary["suggestions"]

    def test_dataset(self):
        summary = get_error_summary(DatasetError("invalid record", file_path="d.jsonl", record_index=2))
        assert summary["file"] == "d.jsonl"
        assert summary["record"] == 2

    def test_plain_exception(self):
        assert get_error_summary(OSError("disk")) == {"type": "OSError", "message": "disk"}
