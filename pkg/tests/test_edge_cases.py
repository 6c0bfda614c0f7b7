"""
Edge case tests for cleanSpectrum: smallest dimensions, boundary noise ratios
and degenerate spectra.
"""

import logging

import numpy as np
import pytest
from pydantic import ValidationError

from cleanSpectrum.dataset import load_records
from cleanSpectrum.errors import PreconditionError
from cleanSpectrum.evaluation import evaluate, mse
from cleanSpectrum.generators import SpectrumSketch, corr_with_spectrum, normalize_spectrum
from cleanSpectrum.matcore import Rng, SymMatrix, eigen_sym, givens_fix, random_orthogonal
from cleanSpectrum.rie import rie_clean
from cleanSpectrum.validators import NoiseRatio


def test_orthogonal_of_dimension_one():
    q = random_orthogonal(1, Rng(3))
    assert q.shape == (1, 1)
    assert abs(q[0, 0]) == 1.0


def test_orthogonal_of_dimension_zero():
    with pytest.raises(PreconditionError):
        random_orthogonal(0, Rng(3))


@pytest.mark.parametrize("method", ["jacobi", "lapack"])
def test_eigen_of_one_by_one(method):
    decomposition = eigen_sym(SymMatrix(np.array([[2.5]])), method=method)
    assert decomposition.eigenvalues.tolist() == [2.5]
    assert abs(decomposition.eigenvectors[0, 0]) == 1.0


def test_givens_two_by_two_example():
    """Entry (0, 0) becomes 1 and the eigenvalues (2 ± sqrt 2)/2 are kept."""
    rotated = givens_fix(SymMatrix(np.array([[1.5, 0.5], [0.5, 0.5]])), 0, 1)
    assert rotated.entries[0, 0] == 1.0
    expected = [(2 - np.sqrt(2)) / 2, (2 + np.sqrt(2)) / 2]
    assert np.allclose(rotated.eigenvalues(), expected, atol=1e-12)


@pytest.mark.parametrize("entries,fragment", [
    ([[0.5, 0.1], [0.1, 1.0]], "division by zero"),
    ([[2.0, 0.1], [0.1, 3.0]], "negative discriminant"),
    ([[2.0, 2.0], [2.0, 3.0]], "do not straddle"),
])
def test_givens_preconditions(entries, fragment):
    with pytest.raises(PreconditionError, match=fragment):
        givens_fix(SymMatrix(np.array(entries)), 0, 1)


def test_noise_ratio_boundary():
    assert NoiseRatio(n=180, t=180).q == 1.0
    with pytest.raises(ValidationError):
        NoiseRatio(n=180, t=179)


@pytest.mark.parametrize("q", [0.0, -0.5, 1.5])
def test_rie_rejects_noise_outside_unit_interval(q):
    with pytest.raises(PreconditionError, match="0 < q <= 1"):
        rie_clean([0.5, 1.5], q)


def test_rie_accepts_q_equal_one():
    cleaned = rie_clean([0.2, 0.8, 2.0], 1.0)
    assert float(np.sum(cleaned)) == pytest.approx(3.0)


def test_rie_single_eigenvalue():
    assert rie_clean([1.0], 0.5).tolist() == pytest.approx([1.0])


def test_rie_keeps_zero_eigenvalues():
    """A rank-deficient sample spectrum keeps its zeros after cleaning."""
    cleaned = rie_clean([0.0, 0.0, 3.0], 1.0)
    assert cleaned[:2].tolist() == [0.0, 0.0]
    assert cleaned[2] == pytest.approx(3.0)


def test_normalize_zero_spectrum():
    with pytest.raises(PreconditionError, match="positive sum"):
        normalize_spectrum([0.0, 0.0])


def test_normalize_single_value():
    assert normalize_spectrum([7.0]).values.tolist() == [1.0]


def test_sketch_rejects_wrong_trace():
    with pytest.raises(PreconditionError, match="sum to N"):
        SpectrumSketch(np.array([1.0, 2.0]))


def test_sketch_is_read_only():
    sketch = SpectrumSketch(np.array([1.5, 0.5]))
    assert sketch.values.tolist() == [0.5, 1.5]
    with pytest.raises(ValueError):
        sketch.values[0] = 1.0


def test_mse_of_single_values():
    assert mse([3.0], [1.0]) == 4.0


def test_empty_dataset_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    assert load_records(path) == []


def test_resample_skips_grid_below_n(small_records, caplog):
    with caplog.at_level(logging.WARNING, logger="cleanSpectrum.evaluation"):
        report = evaluate(lambda record: np.asarray(record.true_spectrum), small_records, [4, 16],
                          resample=True)
    assert [row.t for row in report.rows] == [16]
    assert "No records for T = 4" in caplog.text


def test_evaluate_without_records(caplog):
    with caplog.at_level(logging.WARNING, logger="cleanSpectrum.evaluation"):
        report = evaluate(lambda record: record.true_spectrum, [], [10, 20])
    assert report.rows == []
    assert "no rows" in caplog.text


def test_specified_spectrum_at_sum_tolerance():
    """A sketch that misses sum N by almost the accepted slack still rotates to a unit diagonal."""
    values = normalize_spectrum(np.linspace(0.1, 3.0, 180)).values * (1.0 + 5e-10)
    sketch = SpectrumSketch(values)
    assert abs(float(np.sum(sketch.values)) - 180.0) > 1e-8

    corr = corr_with_spectrum(sketch, Rng(4))
    assert np.array_equal(np.diagonal(corr.entries), np.ones(180))
    assert np.max(np.abs(corr.spectrum() - sketch.values)) <= 1e-6
