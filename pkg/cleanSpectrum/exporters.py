#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Export utilities for evaluation reports, loss histories and comparison panels.
Writes plottable CSV and JSON files.
"""

import csv
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from cleanSpectrum.errors import FileOperationError
from cleanSpectrum.logging_config import json_default
from cleanSpectrum.validators import EvalReport

# Configure logger
logger = logging.getLogger(__name__)

REPORT_HEADER = ["t", "q", "mse_sample", "mse_rie", "mse_model", "count"]
LOSS_HEADER = ["epoch", "loss"]


class ResultExporter:
    """
    Save evaluation results to disk.
    """

    def __init__(self, export_dir: Optional[Union[str, Path]] = None):
        """
        Initialize the result exporter.

        Args:
            export_dir: Directory for saving export files (default: current directory)
        """
        self.export_dir = Path(export_dir) if export_dir else Path.cwd()

        if not self.export_dir.exists():
            logger.debug("Creating export directory: %s", self.export_dir)
            self.export_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, filename: Optional[str], prefix: str, suffix: str) -> Path:
        if filename is None:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            filename = f"{prefix}_{timestamp}.{suffix}"
        return self.export_dir / filename

    def _write_csv(self, file_path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
        try:
            with open(file_path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            logger.error("Failed to export CSV: %s", str(e))
            raise FileOperationError(f"Cannot write {file_path}: {e}", file_path=str(file_path)) from e
        logger.info("Exported %d row(s) to %s", len(rows), file_path)
        return file_path

    def export_json(
        self,
        data: dict[str, Any],
        filename: Optional[str] = None,
        indent: int = 2
    ) -> Path:
        """
        Export data to a JSON file.

        Args:
            data: Dictionary data to export (numpy values allowed)
            filename: Custom filename (default: auto-generated timestamp)
            indent: JSON indentation level

        Returns:
            Path to the saved file
        """
        file_path = self._path(filename, "results", "json")
        try:
            with open(file_path, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=indent, ensure_ascii=False, default=json_default)
        except OSError as e:
            logger.error("Failed to export JSON: %s", str(e))
            raise FileOperationError(f"Cannot write {file_path}: {e}", file_path=str(file_path)) from e

        logger.info("Exported results to %s", file_path)
        return file_path

    def export_report_csv(self, report: EvalReport, filename: Optional[str] = None) -> Path:
        """
        Export an evaluation report, one row per T.

        Header: t,q,mse_sample,mse_rie,mse_model,count
        """
        rows = [[row.t, repr(row.q), repr(row.mse_sample), repr(row.mse_rie),
                 repr(row.mse_model), row.count] for row in report.rows]
        return self._write_csv(self._path(filename, "report", "csv"), REPORT_HEADER, rows)

    def export_loss_history_csv(self, history: Sequence[float], filename: Optional[str] = None) -> Path:
        """Export per-epoch mean training loss."""
        rows = [[epoch, repr(float(value))] for epoch, value in enumerate(history)]
        return self._write_csv(self._path(filename, "loss", "csv"), LOSS_HEADER, rows)

    def export_comparison_json(self, comparison: dict[str, Any], filename: Optional[str] = None) -> Path:
        """Export the spectra and L2 distances of one record."""
        return self.export_json(comparison, filename=filename or self._path(None, "compare", "json").name)

    def export_noise_profile_csv(
        self,
        true_spectrum: np.ndarray,
        profile: dict[int, np.ndarray],
        filename: Optional[str] = None
    ) -> Path:
        """
        Export sample spectra at several T next to the true spectrum.

        Columns: index, true, then one column per T (ascending eigenvalues).
        """
        t_values = sorted(profile)
        header = ["index", "true"] + [f"t_{t}" for t in t_values]
        rows = []
        for i, value in enumerate(true_spectrum):
            rows.append([i, repr(float(value))] + [repr(float(profile[t][i])) for t in t_values])
        return self._write_csv(self._path(filename, "noise", "csv"), header, rows)
