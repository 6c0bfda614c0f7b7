"""
Tests for the model file format.
"""

import hashlib

import numpy as np
import pytest

from cleanSpectrum.errors import FileOperationError, SerializationError
from cleanSpectrum.matcore import Rng
from cleanSpectrum.model_io import FORMAT_NAME, dumps_model, load_model, loads_model, save_model
from cleanSpectrum.network import MlpModel, ModelVariant, forward


@pytest.fixture
def model():
    built = MlpModel.build(5, Rng(21), hidden=(7, 6))
    built.biases = [Rng(22).normal(b.shape) for b in built.biases]
    return built


def assert_same_model(a: MlpModel, b: MlpModel) -> None:
    assert a.variant is b.variant
    assert a.tied == b.tied
    assert a.layers == b.layers
    for x, y in zip(a.weights + a.biases, b.weights + b.biases):
        assert np.array_equal(x, y)


class TestRoundTrip:
    """Save and load must reproduce the model bit for bit."""

    def test_file_round_trip(self, model, tmp_path):
        path = save_model(model, tmp_path / "models" / "net.txt")
        loaded = load_model(path)
        assert_same_model(model, loaded)
        x = np.linspace(0.2, 1.8, 6)
        assert np.array_equal(forward(model, x), forward(loaded, x))

    def test_tied_round_trip(self):
        tied = MlpModel.build(4, Rng(23), hidden=(3,), variant=ModelVariant.PLAIN, tied=True)
        loaded = loads_model(dumps_model(tied))
        assert_same_model(tied, loaded)
        assert loaded.tied_partners == {1: 0}

    def test_header_and_checksum_lines(self, model):
        lines = dumps_model(model).splitlines()
        assert lines[0] == f"{FORMAT_NAME} 1"
        assert lines[1] == "variant adjusted"
        assert lines[3] == "layers 3"
        assert lines[-1].startswith("checksum sha256 ")


class TestCorruptFiles:
    """Damaged or foreign files raise SerializationError."""

    def test_edited_value(self, model):
        text = dumps_model(model)
        lines = text.splitlines()
        lines[1] = "variant plain"
        with pytest.raises(SerializationError, match="checksum"):
            loads_model("\n".join(lines) + "\n")

    def test_missing_checksum(self, model):
        text = dumps_model(model)
        without = "".join(text.splitlines(keepends=True)[:-1])
        with pytest.raises(SerializationError):
            loads_model(without)

    def test_truncated(self, model):
        text = dumps_model(model)
        with pytest.raises(SerializationError):
            loads_model(text[: len(text) // 2])

    def test_single_line(self):
        with pytest.raises(SerializationError, match="truncated"):
            loads_model("cleanspectrum-mlp 1")

    def test_wrong_version(self, model):
        body = dumps_model(model).replace(f"{FORMAT_NAME} 1", f"{FORMAT_NAME} 9", 1)
        body = "".join(body.splitlines(keepends=True)[:-1])
        digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
        with pytest.raises(SerializationError, match="version"):
            loads_model(body + f"checksum sha256 {digest}\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileOperationError):
            load_model(tmp_path / "absent.txt")

    def test_error_names_source(self, model, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text(dumps_model(model).replace("tied 0", "tied 1"), encoding="utf-8")
        with pytest.raises(SerializationError) as excinfo:
            load_model(path)
        assert excinfo.value.file_path == str(path)
