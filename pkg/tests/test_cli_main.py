#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tests for the main CLI functionality of cleanSpectrum.
"""

import argparse
import csv
import json
import logging
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

import cleanSpectrum.matcore
from cleanSpectrum.__main__ import main, parse_int_list, parse_mix, parse_t_grid, setup_argparse
from cleanSpectrum.config import DEFAULT_METHOD_MIX, ConfigManager
from cleanSpectrum.dataset import generate_dataset, load_records
from cleanSpectrum.matcore import Rng
from cleanSpectrum.model_io import load_model, save_model
from cleanSpectrum.network import MlpModel
from cleanSpectrum.validators import DatasetManifest


@pytest.fixture(autouse=True)
def isolated_cli(tmp_path, monkeypatch):
    """Keep config, eigensolver default and logging handlers local to each test."""
    monkeypatch.setattr("cleanSpectrum.config.config_manager",
                        ConfigManager(config_file=tmp_path / "absent.json"))
    monkeypatch.setattr(cleanSpectrum.matcore, "DEFAULT_EIGEN_METHOD",
                        cleanSpectrum.matcore.DEFAULT_EIGEN_METHOD)
    with patch("cleanSpectrum.__main__.configure_logging"):
        yield


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    """A small N = 4 dataset and an untrained adjusted model."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data.jsonl"
    manifest = DatasetManifest(n=4, t_min=4, t_max=16, method_mix=DEFAULT_METHOD_MIX,
                               count=12, master_seed=3)
    generate_dataset(manifest, data, show_progress=False)

    model = MlpModel.build(4, Rng(1), hidden=(8,))
    model.biases[-1] = np.ones(4)
    model_path = save_model(model, root / "model.txt")
    return data, model_path


def stdout_values(text: str) -> list[float]:
    return [float(line) for line in text.split()]


class TestArgumentParsing:
    """Tests for CLI setup and argument parsing."""

    def test_t_grid_range(self):
        assert parse_t_grid("40:160:40") == [40, 80, 120, 160]
        assert parse_t_grid("5:7") == [5, 6, 7]

    def test_t_grid_list(self):
        assert parse_t_grid("40,80") == [40, 80]

    @pytest.mark.parametrize("text", ["1:2:3:4", "a:b", "10:20:0"])
    def test_t_grid_invalid(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_t_grid(text)

    def test_int_list(self):
        assert parse_int_list("300,200") == [300, 200]
        with pytest.raises(argparse.ArgumentTypeError):
            parse_int_list("300,x")

    def test_mix_positional(self):
        mix = parse_mix("0.5,0.5,0,0")
        assert mix == {"spectrum_sketch": 0.5, "unit_sphere": 0.5,
                       "constant_blocks": 0.0, "toeplitz_blocks": 0.0}

    def test_mix_named(self):
        mix = parse_mix("spectrum_sketch=1")
        assert mix["spectrum_sketch"] == 1.0
        assert mix["toeplitz_blocks"] == 0.0

    def test_mix_wrong_count(self):
        with pytest.raises(argparse.ArgumentTypeError, match="4 weights"):
            parse_mix("0.5,0.5")

    def test_global_options_before_command(self):
        args = setup_argparse().parse_args(
            ["--eigen-method", "jacobi", "--no-progress", "rie", "--spectrum-file", "s.txt",
             "--n", "3", "--t", "6"])
        assert args.command == "rie"
        assert args.eigen_method == "jacobi"
        assert args.no_progress is True
        assert args.leave_one_out is False

    def test_command_required(self):
        with pytest.raises(SystemExit):
            setup_argparse().parse_args([])


class TestCommands:
    """End-to-end runs of each subcommand on small inputs."""

    def test_gen(self, tmp_path):
        out = tmp_path / "gen.jsonl"
        code = main(["--no-progress", "gen", "--n", "5", "--t-min", "5", "--t-max", "20",
                     "--count", "6", "--seed", "11", "--out", str(out), "--mix", "1,0,0,0"])
        assert code == 0
        records = load_records(out)
        assert len(records) == 6
        assert {record.generator_tag for record in records} == {"spectrum_sketch"}

    def test_train(self, tmp_path, artifacts):
        data, _ = artifacts
        out = tmp_path / "trained.txt"
        code = main(["--no-progress", "train", "--data", str(data), "--hidden", "6",
                     "--dropout", "0", "--epochs", "3", "--batch", "4", "--seed", "2",
                     "--out-model", str(out)])
        assert code == 0
        model = load_model(out)
        assert model.input_dim == 5
        assert model.output_dim == 4
        loss_lines = (tmp_path / "trained.txt.loss.csv").read_text(encoding="utf-8").splitlines()
        assert loss_lines[0] == "epoch,loss"
        assert len(loss_lines) == 4

    def test_train_dimension_check(self, tmp_path, artifacts):
        data, _ = artifacts
        code = main(["train", "--data", str(data), "--n", "7", "--out-model", str(tmp_path / "m.txt")])
        assert code == 1

    def test_clean(self, tmp_path, artifacts, capsys):
        _, model_path = artifacts
        spectrum = tmp_path / "spectrum.txt"
        spectrum.write_text("0.2 0.8\n1.2 1.8\n", encoding="utf-8")
        code = main(["clean", "--model", str(model_path), "--spectrum-file", str(spectrum), "--t", "8"])
        assert code == 0
        values = stdout_values(capsys.readouterr().out)
        assert len(values) == 4
        assert values == sorted(values)

    def test_rie(self, tmp_path, capsys):
        spectrum = tmp_path / "spectrum.txt"
        spectrum.write_text("1.5,0.5,1.0,1.0", encoding="utf-8")
        code = main(["--eigen-method", "jacobi", "rie", "--spectrum-file", str(spectrum),
                     "--n", "4", "--t", "8"])
        assert code == 0
        values = stdout_values(capsys.readouterr().out)
        assert values == sorted(values)
        assert sum(values) == pytest.approx(4.0)
        assert cleanSpectrum.matcore.DEFAULT_EIGEN_METHOD == "jacobi"

    def test_rie_estimate_flag(self, tmp_path, capsys):
        spectrum = tmp_path / "spectrum.txt"
        spectrum.write_text("0.2 0.6 1.0 2.2", encoding="utf-8")
        outputs = {}
        for estimate in ("kernel", "resolvent"):
            assert main(["rie", "--spectrum-file", str(spectrum), "--n", "4", "--t", "5",
                         "--estimate", estimate]) == 0
            outputs[estimate] = stdout_values(capsys.readouterr().out)
            assert sum(outputs[estimate]) == pytest.approx(4.0)
        assert outputs["kernel"] != pytest.approx(outputs["resolvent"])

    def test_rie_length_mismatch(self, tmp_path, capsys):
        spectrum = tmp_path / "spectrum.txt"
        spectrum.write_text("1.0 1.0 1.0", encoding="utf-8")
        code = main(["rie", "--spectrum-file", str(spectrum), "--n", "4", "--t", "8"])
        assert code == 1
        assert "--n is 4" in capsys.readouterr().err

    def test_eval(self, tmp_path, artifacts):
        data, model_path = artifacts
        out = tmp_path / "report.csv"
        code = main(["--no-progress", "eval", "--model", str(model_path), "--data", str(data),
                     "--t-grid", "8:16:8", "--out-csv", str(out), "--resample"])
        assert code == 0
        with open(out, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert [row["t"] for row in rows] == ["8", "16"]
        assert all(row["count"] == "12" for row in rows)

    def test_compare_to_stdout(self, artifacts, capsys):
        data, model_path = artifacts
        code = main(["compare", "--model", str(model_path), "--data", str(data), "--record-index", "2"])
        assert code == 0
        panel = json.loads(capsys.readouterr().out)
        assert set(panel["l2"]) == {"sample", "rie", "model"}
        assert len(panel["true"]) == 4

    def test_compare_index_out_of_range(self, artifacts):
        data, model_path = artifacts
        code = main(["compare", "--model", str(model_path), "--data", str(data), "--record-index", "50"])
        assert code == 1

    def test_noise_to_stdout(self, capsys):
        code = main(["noise", "--shape", "flat", "--n", "6", "--t-values", "12,60", "--seed", "1"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "index,true,t_12,t_60"
        assert len(lines) == 7

    def test_noise_to_csv(self, tmp_path):
        out = tmp_path / "noise.csv"
        assert main(["noise", "--n", "10", "--t-values", "20", "--out-csv", str(out)]) == 0
        assert out.read_text(encoding="utf-8").startswith("index,true,t_20")


class TestErrorHandling:
    """Tests for exit codes and error output."""

    def test_missing_model_file(self, tmp_path, capsys):
        spectrum = tmp_path / "spectrum.txt"
        spectrum.write_text("1 1", encoding="utf-8")
        code = main(["clean", "--model", str(tmp_path / "nope.txt"),
                     "--spectrum-file", str(spectrum), "--t", "4"])
        assert code == 1
        assert "ERROR" in capsys.readouterr().err

    def test_empty_spectrum_file(self, tmp_path, capsys):
        spectrum = tmp_path / "empty.txt"
        spectrum.write_text("", encoding="utf-8")
        code = main(["rie", "--spectrum-file", str(spectrum), "--n", "2", "--t", "4"])
        assert code == 1
        assert "empty" in capsys.readouterr().err

    def test_failure_log_carries_error_summary(self, tmp_path, caplog):
        spectrum = tmp_path / "spectrum.txt"
        spectrum.write_text("1.0 1.0 1.0", encoding="utf-8")
        with caplog.at_level(logging.DEBUG, logger="cleanSpectrum"):
            assert main(["rie", "--spectrum-file", str(spectrum), "--n", "4", "--t", "8"]) == 1
        failures = [record for record in caplog.records if record.getMessage() == "Command failed"]
        assert failures[0].error["type"] == "PreconditionError"
        assert failures[0].error["suggestions"]

    def test_invalid_setting(self, tmp_path):
        spectrum = tmp_path / "spectrum.txt"
        spectrum.write_text("1 1", encoding="utf-8")
        code = main(["rie", "--spectrum-file", str(spectrum), "--n", "2", "--t", "1"])
        assert code == 1

    def test_keyboard_interrupt(self):
        with patch.dict("cleanSpectrum.__main__.HANDLERS",
                        {"noise": MagicMock(side_effect=KeyboardInterrupt)}):
            assert main(["noise"]) == 130

    def test_unexpected_exception(self, capsys):
        with patch.dict("cleanSpectrum.__main__.HANDLERS",
                        {"noise": MagicMock(side_effect=RuntimeError("boom"))}):
            assert main(["noise"]) == 1
        assert "boom" in capsys.readouterr().err

    def test_config_file_is_used(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"eigen_method": "jacobi"}), encoding="utf-8")
        assert main(["--config", str(config), "noise", "--n", "4", "--t-values", "8"]) == 0
        assert cleanSpectrum.matcore.DEFAULT_EIGEN_METHOD == "jacobi"

    def test_logging_configured_from_flags(self, tmp_path):
        with patch("cleanSpectrum.__main__.configure_logging") as mock_logging:
            main(["--log-level", "debug", "--json-logs", "noise", "--n", "4", "--t-values", "8"])
        mock_logging.assert_called_once_with(level="DEBUG", json_output=True, log_file=None)
