#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Estimator comparison: MSE sweeps over sample counts, single-record panels,
example spectrum families and noise profiles.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from tqdm import tqdm

from cleanSpectrum.errors import DimensionMismatchError, PreconditionError
from cleanSpectrum.generators import GeneratorTag, SpectrumSketch, corr_with_spectrum, normalize_spectrum
from cleanSpectrum.matcore import Rng, derive_seed
from cleanSpectrum.network import MlpModel, clean
from cleanSpectrum.rie import StieltjesEstimate, rie_clean
from cleanSpectrum.sampling import draw_sample_correlation, sample_spectrum_direct
from cleanSpectrum.validators import EvalReport, EvalRow, SampleRecord

# Configure logger
logger = logging.getLogger(__name__)

# A spectrum estimator maps a record to an estimate of its true spectrum
Estimator = Callable[[SampleRecord], NDArray[np.float64]]

NAMED_SPECTRA = ("flat", "exponential", "spiked", "slow", "concave", "extreme")


def mse(estimate: ArrayLike, truth: ArrayLike) -> float:
    """Mean squared error between two spectra, both sorted first."""
    a, b = np.sort(np.asarray(estimate, dtype=np.float64)), np.sort(np.asarray(truth, dtype=np.float64))
    if a.shape != b.shape:
        raise DimensionMismatchError("Spectra lengths differ", expected=b.shape, actual=a.shape)
    return float(np.mean((a - b) ** 2))


def l2_distance(estimate: ArrayLike, truth: ArrayLike) -> float:
    """Euclidean distance between two spectra, both sorted first."""
    a, b = np.sort(np.asarray(estimate, dtype=np.float64)), np.sort(np.asarray(truth, dtype=np.float64))
    if a.shape != b.shape:
        raise DimensionMismatchError("Spectra lengths differ", expected=b.shape, actual=a.shape)
    return float(np.linalg.norm(a - b))


def model_estimator(model: MlpModel, rescale: bool = True) -> Estimator:
    """Wrap a trained network as an Estimator."""
    def estimate(record: SampleRecord) -> NDArray[np.float64]:
        if model.output_dim != record.n:
            raise DimensionMismatchError("Model output dimension does not match the records",
                                         expected=record.n, actual=model.output_dim)
        return clean(model, record.sample_spectrum, record.q, rescale=rescale).values
    return estimate


def _as_estimator(model: Union[MlpModel, Estimator], rescale: bool) -> Estimator:
    return model_estimator(model, rescale) if isinstance(model, MlpModel) else model


def resample_record(record: SampleRecord, t: int) -> SampleRecord:
    """
    Fresh sample spectrum of a record's population at sample count t.

    Spectrum-sketch records use the eigenvalue-only path. Records of the
    matrix families rebuild a population with the stored true spectrum and
    go through the sample correlation matrix, as they were generated. The
    seed is derived from (record seed, t), so repeated evaluations agree.
    """
    rng = Rng(derive_seed(record.seed, t))
    truth = SpectrumSketch(np.asarray(record.true_spectrum))
    clipped = record.clipped
    if record.generator_tag == GeneratorTag.SPECTRUM_SKETCH.value:
        sample = sample_spectrum_direct(truth, t, rng)
    else:
        corr, clipped = draw_sample_correlation(corr_with_spectrum(truth, rng), t, rng)
        sample = np.sort(np.maximum(corr.spectrum(), 0.0))
    return record.model_copy(update={
        "t": t,
        "q": record.n / t,
        "sample_spectrum": sample.tolist(),
        "clipped": clipped,
    })


def _evaluate_cell(t: int, records: Sequence[SampleRecord], estimator: Estimator,
                   rie_rescale: bool, leave_one_out: bool, rie_estimate: StieltjesEstimate | str) -> EvalRow:
    sample_errors, rie_errors, model_errors = [], [], []
    for record in records:
        truth = record.true_spectrum
        sample_errors.append(mse(record.sample_spectrum, truth))
        rie_errors.append(mse(rie_clean(record.sample_spectrum, record.q, rescale=rie_rescale,
                                        leave_one_out=leave_one_out, estimate=rie_estimate), truth))
        model_errors.append(mse(estimator(record), truth))
    return EvalRow(
        t=t,
        q=records[0].n / t,
        mse_sample=float(np.mean(sample_errors)),
        mse_rie=float(np.mean(rie_errors)),
        mse_model=float(np.mean(model_errors)),
        count=len(records),
    )


def evaluate(
    model: Union[MlpModel, Estimator],
    records: Iterable[SampleRecord],
    t_grid: Sequence[int],
    *,
    resample: bool = False,
    clean_rescale: bool = True,
    rie_rescale: bool = True,
    leave_one_out: bool = False,
    rie_estimate: StieltjesEstimate | str = StieltjesEstimate.KERNEL,
    show_progress: bool = False,
) -> EvalReport:
    """
    Compare the raw sample spectrum, the RIE and the model over a grid of T.

    Without resample, each grid cell holds the records stored with that T.
    With resample, every record is re-sampled at every grid T. Cells
    without records are left out with a warning.

    Args:
        model: Trained network or any Estimator
        records: Held-out records
        t_grid: Sample counts to report
        resample: Draw fresh sample spectra for every grid T
        clean_rescale: Trace-rescale the model output
        rie_rescale: Trace-rescale the RIE output
        leave_one_out: RIE self-exclusion flag
        rie_estimate: RIE Stieltjes transform estimate
        show_progress: Display a progress bar over the grid

    Returns:
        EvalReport with one row per populated T
    """
    estimator = _as_estimator(model, clean_rescale)
    held_out = list(records)
    rows = []

    grid = sorted(set(int(t) for t in t_grid))
    for t in tqdm(grid, desc="Evaluating", unit="T", disable=not show_progress):
        if resample:
            cell = [resample_record(record, t) for record in held_out if t >= record.n]
        else:
            cell = [record for record in held_out if record.t == t]
        if not cell:
            logger.warning("No records for T = %d; row omitted", t)
            continue
        rows.append(_evaluate_cell(t, cell, estimator, rie_rescale, leave_one_out, rie_estimate))

    report = EvalReport(rows=rows)
    if rows:
        logger.info("Evaluated %d grid row(s): mean MSE sample %.4e, rie %.4e, model %.4e",
                    len(rows), report.mean_mse_sample, report.mean_mse_rie, report.mean_mse_model)
    else:
        logger.warning("Evaluation produced no rows; check the T grid against the dataset")
    return report


@dataclass(frozen=True)
class Comparison:
    """Spectra of one record under each estimator, with L2 distances to the truth."""
    true_spectrum: NDArray[np.float64]
    sample_spectrum: NDArray[np.float64]
    rie_spectrum: NDArray[np.float64]
    model_spectrum: NDArray[np.float64]
    t: int
    q: float

    @property
    def distances(self) -> dict[str, float]:
        return {
            "sample": l2_distance(self.sample_spectrum, self.true_spectrum),
            "rie": l2_distance(self.rie_spectrum, self.true_spectrum),
            "model": l2_distance(self.model_spectrum, self.true_spectrum),
        }

    def as_dict(self) -> dict[str, object]:
        return {
            "t": self.t,
            "q": self.q,
            "true": self.true_spectrum.tolist(),
            "sample": self.sample_spectrum.tolist(),
            "rie": self.rie_spectrum.tolist(),
            "model": self.model_spectrum.tolist(),
            "l2": self.distances,
        }


def compare_single(
    record: SampleRecord,
    model: Union[MlpModel, Estimator],
    clean_rescale: bool = True,
    rie_rescale: bool = True,
    leave_one_out: bool = False,
    rie_estimate: StieltjesEstimate | str = StieltjesEstimate.KERNEL,
) -> Comparison:
    """Estimate one record's spectrum with every estimator."""
    estimator = _as_estimator(model, clean_rescale)
    return Comparison(
        true_spectrum=np.sort(np.asarray(record.true_spectrum)),
        sample_spectrum=np.sort(np.asarray(record.sample_spectrum)),
        rie_spectrum=rie_clean(record.sample_spectrum, record.q, rescale=rie_rescale,
                               leave_one_out=leave_one_out, estimate=rie_estimate),
        model_spectrum=np.sort(estimator(record)),
        t=record.t,
        q=record.q,
    )


def named_spectrum(shape: str, n: int) -> SpectrumSketch:
    """
    Example population spectra.

    flat: all equal; exponential: exp(-5k/n); spiked: one eigenvalue with
    30% of the variance over a flat bulk; slow: k^(-1/2); concave:
    1.05 - (k/n)²; extreme: one factor with 90% of the variance.
    """
    if n < 2:
        raise PreconditionError(f"Named spectra need n >= 2, got {n}", condition="n >= 2")
    k = np.arange(n, dtype=np.float64)
    if shape == "flat":
        values = np.ones(n)
    elif shape == "exponential":
        values = np.exp(-5.0 * k / n)
    elif shape == "spiked":
        values = np.full(n, 0.7 / (n - 1))
        values[0] = 0.3
    elif shape == "slow":
        values = (k + 1.0) ** -0.5
    elif shape == "concave":
        values = 1.05 - (k / n) ** 2
    elif shape == "extreme":
        values = np.full(n, 0.1 / (n - 1))
        values[0] = 0.9
    else:
        raise PreconditionError(f"Unknown spectrum shape '{shape}'",
                                condition=f"shape in {{{', '.join(NAMED_SPECTRA)}}}")
    return normalize_spectrum(values)


def noise_profile(true_spectrum: SpectrumSketch, t_values: Sequence[int],
                  rng: Rng) -> dict[int, NDArray[np.float64]]:
    """
    Sample spectra of one population at several sample counts.

    Each T gets its own stream derived from rng's seed and T.
    """
    profile = {}
    for t in t_values:
        if t < true_spectrum.n:
            raise PreconditionError(f"T = {t} is below N = {true_spectrum.n}", condition="T >= N")
        profile[int(t)] = sample_spectrum_direct(true_spectrum, int(t), rng.derive(int(t)))
    return profile
