#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Dataset files of paired spectra.

A dataset is a newline-delimited JSON file, one SampleRecord per line in
record-index order, plus a manifest (<dataset>.manifest.json) holding the
parameters that regenerate it. Record i uses the seed derived from
(master_seed, i, attempt), so the file bytes depend only on the manifest.
"""

import functools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np
from pydantic import ValidationError

from cleanSpectrum.config import DATASET_ENCODING
from cleanSpectrum.errors import CleanSpectrumError, DatasetError, FileOperationError
from cleanSpectrum.generators import DEFAULT_GIVENS_PRECISION
from cleanSpectrum.matcore import Rng, derive_seed
from cleanSpectrum.performance import PerformanceMetrics, iter_with_progress
from cleanSpectrum.sampling import make_record
from cleanSpectrum.validators import DatasetManifest, SampleRecord, validate_manifest, validate_record

# Configure logger
logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.json"


@dataclass(frozen=True)
class RecordOutcome:
    """A generated record with the redraws it needed."""
    index: int
    record: SampleRecord
    failures: tuple[str, ...]


def manifest_path(dataset_path: Union[str, Path]) -> Path:
    path = Path(dataset_path)
    return path.with_name(path.name + MANIFEST_SUFFIX)


def build_record(manifest: DatasetManifest, index: int,
                 precision: float = DEFAULT_GIVENS_PRECISION) -> RecordOutcome:
    """
    Generate record `index` of a dataset, redrawing on degenerate draws.

    Raises:
        DatasetError: When the retry budget is exhausted
    """
    failures: list[str] = []
    for attempt in range(manifest.retry_budget + 1):
        rng = Rng(derive_seed(manifest.master_seed, index, attempt))
        t = int(rng.integers(manifest.t_min, manifest.t_max))
        try:
            record = make_record(manifest.n, t, manifest.method_mix, rng,
                                 direct_spectrum=manifest.direct_spectrum, precision=precision)
            return RecordOutcome(index=index, record=record, failures=tuple(failures))
        except (CleanSpectrumError, ValidationError, np.linalg.LinAlgError) as e:
            failures.append(type(e).__name__)
            logger.warning("Record %d attempt %d failed (%s: %s); redrawing",
                           index, attempt, type(e).__name__, e)

    raise DatasetError(
        f"Record {index} failed {len(failures)} time(s); retry budget of "
        f"{manifest.retry_budget} exhausted",
        record_index=index)


def write_manifest(manifest: DatasetManifest, dataset_path: Union[str, Path]) -> Path:
    path = manifest_path(dataset_path)
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding=DATASET_ENCODING)
    return path


def load_manifest(dataset_path: Union[str, Path]) -> DatasetManifest:
    """Read and validate the manifest stored next to a dataset."""
    path = manifest_path(dataset_path)
    try:
        data = json.loads(path.read_text(encoding=DATASET_ENCODING))
    except OSError as e:
        raise FileOperationError(f"Cannot read manifest: {e}", file_path=str(path)) from e
    except json.JSONDecodeError as e:
        raise DatasetError(f"Manifest is not valid JSON: {e}", file_path=str(path)) from e

    error = validate_manifest(data)
    if error:
        raise DatasetError(error, file_path=str(path))
    return DatasetManifest(**data)


def _complete_records(path: Path) -> int:
    """Count complete lines and drop a trailing partial line."""
    data = path.read_bytes()
    complete = data.rfind(b"\n") + 1
    if complete < len(data):
        logger.warning("Dropping a partial record at the end of %s", path)
        with open(path, "r+b") as f:
            f.truncate(complete)
    return data[:complete].count(b"\n")


def generate_dataset(
    manifest: DatasetManifest,
    out_path: Union[str, Path],
    workers: int = 1,
    show_progress: bool = True,
    precision: float = DEFAULT_GIVENS_PRECISION,
) -> PerformanceMetrics:
    """
    Write `manifest.count` records to out_path, resuming an interrupted run.

    Records are generated in parallel when workers > 1 and written by this
    process in index order.

    Args:
        manifest: Dataset parameters
        out_path: Target JSONL file
        workers: Worker processes
        show_progress: Display a progress bar
        precision: Givens tolerance for specified-spectrum matrices

    Returns:
        PerformanceMetrics of the run

    Raises:
        DatasetError: Retry budget exhausted, or an existing file belongs to another manifest
    """
    path = Path(out_path)
    metrics = PerformanceMetrics()
    metrics.start()

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        start = 0
        if path.exists():
            existing = load_manifest(path) if manifest_path(path).exists() else None
            if existing != manifest:
                raise DatasetError("Existing dataset was generated from a different manifest; "
                                   "remove it or choose another output", file_path=str(path))
            start = min(_complete_records(path), manifest.count)
            if start:
                logger.info("Resuming %s at record %d of %d", path, start, manifest.count)
        else:
            path.write_bytes(b"")
        write_manifest(manifest, path)

        indices = list(range(start, manifest.count))
        task = functools.partial(build_record, manifest, precision=precision)
        with open(path, "a", encoding=DATASET_ENCODING, newline="\n") as f:
            for outcome in iter_with_progress(indices, task, workers=workers,
                                              description="Generating", unit="record",
                                              show_progress=show_progress):
                f.write(outcome.record.model_dump_json() + "\n")
                metrics.record_records(1)
                for failure in outcome.failures:
                    metrics.record_redraw(failure)
    except OSError as e:
        raise FileOperationError(f"Cannot write dataset: {e}", file_path=str(path)) from e
    finally:
        metrics.end()

    logger.info("Dataset %s holds %d record(s)", path, manifest.count)
    return metrics


def read_dataset(path: Union[str, Path], limit: Optional[int] = None) -> Iterator[SampleRecord]:
    """
    Stream validated records from a dataset file.

    Raises:
        DatasetError: For a line that is not a valid record
    """
    source = Path(path)
    try:
        f = open(source, "r", encoding=DATASET_ENCODING)
    except OSError as e:
        raise FileOperationError(f"Cannot read dataset: {e}", file_path=str(source)) from e

    with f:
        for index, line in enumerate(f):
            if limit is not None and index >= limit:
                return
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"Invalid JSON: {e}", file_path=str(source), record_index=index) from e
            error = validate_record(data)
            if error:
                raise DatasetError(error, file_path=str(source), record_index=index)
            yield SampleRecord(**data)


def load_records(path: Union[str, Path], limit: Optional[int] = None) -> list[SampleRecord]:
    return list(read_dataset(path, limit=limit))
