"""
Unit tests for the config module.
Tests configuration settings, environment variable handling, and config file support.
"""

import json
from pathlib import Path
from unittest.mock import patch

import pytest

from cleanSpectrum.config import (
    DATASET_ENCODING,
    DEFAULT_METHOD_MIX,
    ENV_PREFIX,
    PROJECT_ROOT,
    ConfigManager,
    Settings,
    get_settings
)
from cleanSpectrum.errors import ConfigurationError


def write_json(path: Path, data: dict) -> Path:
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestConfigSettings:
    """Tests for the config module constants."""

    def test_project_root(self):
        """Test PROJECT_ROOT points at the checkout."""
        assert isinstance(PROJECT_ROOT, Path)
        assert (PROJECT_ROOT / "cleanSpectrum" / "__init__.py").exists()

    def test_dataset_encoding(self):
        assert DATASET_ENCODING == "utf-8"

    def test_default_method_mix(self):
        """Test the default mix weights every generator family equally."""
        assert set(DEFAULT_METHOD_MIX) == {
            "spectrum_sketch", "unit_sphere", "constant_blocks", "toeplitz_blocks"}
        assert sum(DEFAULT_METHOD_MIX.values()) == pytest.approx(1.0)

    def test_settings_defaults(self):
        """Test the typed defaults."""
        settings = Settings()
        assert settings.eigen_method == "lapack"
        assert settings.hidden == [300, 200]
        assert settings.dropout == 0.25
        assert settings.retry_budget == 5
        assert settings.rie_rescale is True
        assert settings.rie_leave_one_out is False
        assert settings.rie_estimate == "kernel"


class TestConfigManager:
    """Tests for the ConfigManager class."""

    def test_config_manager_initialization(self, tmp_path):
        """Test that ConfigManager initializes correctly."""
        config = ConfigManager(config_file=tmp_path / "missing.json")
        assert config.profile == "default"
        assert config.env_prefix == ENV_PREFIX == "CLEANSPEC_"
        assert config.config_data == {}

    def test_config_manager_from_json_file(self, tmp_path):
        """Test loading configuration from a JSON file."""
        path = write_json(tmp_path / "config.json", {"epochs": 200, "eigen_method": "jacobi"})
        config = ConfigManager(config_file=path)
        assert config.get("epochs") == 200
        assert config.get("eigen_method") == "jacobi"
        assert config.get("non_existent_key", "default") == "default"

    def test_config_manager_with_profiles(self, tmp_path):
        """Test configuration with profiles and the default fallback."""
        path = write_json(tmp_path / "config.json", {
            "profiles": {
                "default": {"epochs": 50},
                "desk": {"epochs": 5, "hidden": [32, 16]},
            }
        })
        assert ConfigManager(config_file=path).get("epochs") == 50
        assert ConfigManager(config_file=path, profile="desk").get("hidden") == [32, 16]
        assert ConfigManager(config_file=path, profile="absent").get("epochs") == 50

    def test_yaml_file(self, tmp_path):
        """Test loading a YAML file when PyYAML is installed."""
        pytest.importorskip("yaml")
        path = tmp_path / "config.yml"
        path.write_text("batch_size: 16\nrie_rescale: false\n", encoding="utf-8")
        config = ConfigManager(config_file=path)
        assert config.get("batch_size") == 16
        assert config.get("rie_rescale") is False

    def test_unsupported_extension_is_ignored(self, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text("epochs = 3\n", encoding="utf-8")
        assert ConfigManager(config_file=path).config_data == {}

    def test_environment_variable_priority(self, tmp_path, monkeypatch):
        """Test that environment variables take precedence over config file values."""
        path = write_json(tmp_path / "config.json", {"epochs": 7, "batch_size": 32})
        monkeypatch.setenv("CLEANSPEC_EPOCHS", "9")
        config = ConfigManager(config_file=path)
        assert config.get("epochs") == 9
        assert config.get("batch_size") == 32

    def test_type_conversion(self, tmp_path, monkeypatch):
        """Test conversion of environment variable strings."""
        config = ConfigManager(config_file=tmp_path / "missing.json")
        monkeypatch.setenv("CLEANSPEC_SHOW_PROGRESS", "false")
        monkeypatch.setenv("CLEANSPEC_RIE_RESCALE", "yes")
        monkeypatch.setenv("CLEANSPEC_WORKERS", "4")
        monkeypatch.setenv("CLEANSPEC_LEARNING_RATE", "1e-4")
        monkeypatch.setenv("CLEANSPEC_HIDDEN", "64,32")
        monkeypatch.setenv("CLEANSPEC_EIGEN_METHOD", "jacobi")

        assert config.get("show_progress") is False
        assert config.get("rie_rescale") is True
        assert config.get("workers") == 4
        assert config.get("learning_rate") == pytest.approx(1e-4)
        assert config.get("hidden") == [64, 32]
        assert config.get("eigen_method") == "jacobi"


class TestGetSettings:
    """Tests for get_settings."""

    def test_file_values_and_overrides(self, tmp_path):
        path = write_json(tmp_path / "config.json", {"epochs": 12, "hidden": [20, 10]})
        with patch("cleanSpectrum.config.config_manager", ConfigManager(config_file=path)):
            settings = get_settings(epochs=3, batch_size=None)
        assert settings.epochs == 3
        assert settings.hidden == [20, 10]
        assert settings.batch_size == 64

    def test_invalid_value(self, tmp_path):
        path = write_json(tmp_path / "config.json", {"dropout": 1.5})
        with patch("cleanSpectrum.config.config_manager", ConfigManager(config_file=path)):
            with pytest.raises(ConfigurationError, match="dropout"):
                get_settings()

    def test_invalid_environment_value(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CLEANSPEC_EIGEN_METHOD", "qr")
        with patch("cleanSpectrum.config.config_manager", ConfigManager(config_file=tmp_path / "x.json")):
            with pytest.raises(ConfigurationError):
                get_settings()

    def test_rie_estimate_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CLEANSPEC_RIE_ESTIMATE", "resolvent")
        with patch("cleanSpectrum.config.config_manager", ConfigManager(config_file=tmp_path / "x.json")):
            assert get_settings().rie_estimate == "resolvent"
