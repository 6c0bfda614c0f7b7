"""
Data validation for block parameters, network layouts, dataset records and reports.
Uses Python 3.10 type annotations and Pydantic v2 for schema validation.
"""

import math
from enum import Enum
from typing import Any, Optional
from collections.abc import Mapping

from pydantic import BaseModel, Field, ValidationError, model_validator

from cleanSpectrum.config import DATASET_FORMAT_VERSION

SPECTRUM_SUM_TOLERANCE = 1e-9
SAMPLE_SUM_TOLERANCE = 1e-6
GENERATOR_TAGS = ("spectrum_sketch", "unit_sphere", "constant_blocks", "toeplitz_blocks")


class BlockStructure(str, Enum):
    """Shape of the diagonal blocks of a block correlation matrix."""
    CONSTANT = "constant"
    TOEPLITZ = "toeplitz"


class Activation(str, Enum):
    RECTIFIER = "relu"
    IDENTITY = "identity"


class OptimizerKind(str, Enum):
    SGD = "sgd"
    ADAM = "adam"


class NoiseRatio(BaseModel):
    """Dimension N, sample count T and q = N/T with 0 < q <= 1."""
    n: int = Field(..., ge=1)
    t: int = Field(..., ge=2)

    @model_validator(mode='after')
    def validate_ratio(self) -> 'NoiseRatio':
        """T must be at least N so that q <= 1."""
        if self.t < self.n:
            raise ValueError(f"noise ratio q = N/T must be <= 1 (N={self.n}, T={self.t})")
        return self

    @property
    def q(self) -> float:
        return self.n / self.t


class BlockSpec(BaseModel):
    """Parameters of the constant-correlation and Toeplitz block generators."""
    block_sizes: list[int] = Field(..., min_length=1)
    block_rhos: list[float] = Field(..., min_length=1)
    delta: float = Field(0.0, description="Cross-block correlation level (constant blocks)")
    epsilon: float = Field(..., description="Scale of the unit-vector Gram perturbation")
    structure: BlockStructure

    @model_validator(mode='after')
    def validate_inequalities(self) -> 'BlockSpec':
        """Check the admissible ranges, naming the violated inequality."""
        if len(self.block_sizes) != len(self.block_rhos):
            raise ValueError("block_sizes and block_rhos must have the same length")
        if any(size < 1 for size in self.block_sizes):
            raise ValueError("every block size must be >= 1")
        if any(not 0.0 <= rho < 1.0 for rho in self.block_rhos):
            raise ValueError("every block rho must satisfy 0 <= rho < 1")

        rho_min, rho_max = min(self.block_rhos), max(self.block_rhos)
        if len(self.block_sizes) > 1 and not 0.0 <= self.delta < rho_min:
            raise ValueError(f"delta must satisfy 0 <= delta < rho_min = {rho_min}")

        if self.structure is BlockStructure.CONSTANT:
            if not 0.0 <= self.epsilon < 1.0 - rho_max:
                raise ValueError(f"epsilon must satisfy 0 <= epsilon < 1 - rho_max = {1.0 - rho_max}")
        else:
            upper = (1.0 - rho_max) / (1.0 + rho_max)
            if not 0.0 < self.epsilon < upper:
                raise ValueError(
                    f"epsilon must satisfy 0 < epsilon < (1 - rho_max)/(1 + rho_max) = {upper}")
        return self

    @property
    def n(self) -> int:
        return sum(self.block_sizes)


class LayerSpec(BaseModel):
    """One dense layer: y = a(Wx + b), optionally followed by dropout."""
    fan_in: int = Field(..., ge=1)
    fan_out: int = Field(..., ge=1)
    activation: Activation = Activation.RECTIFIER
    dropout_keep: float = Field(1.0, gt=0.0, le=1.0)


class TrainConfig(BaseModel):
    """Mini-batch training parameters."""
    learning_rate: float = Field(1e-3, gt=0.0)
    batch_size: int = Field(64, ge=1)
    epochs: int = Field(50, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    optimizer: OptimizerKind = OptimizerKind.ADAM
    dropout: bool = True
    show_progress: bool = False


def _check_spectrum(values: list[float], name: str) -> None:
    if any(not math.isfinite(v) for v in values):
        raise ValueError(f"{name} contains non-finite values")
    if any(v < 0.0 for v in values):
        raise ValueError(f"{name} must be nonnegative")
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be sorted ascending")


class SampleRecord(BaseModel):
    """One training or evaluation example: paired sorted spectra and provenance."""
    format_version: int = Field(DATASET_FORMAT_VERSION, ge=1, le=DATASET_FORMAT_VERSION)
    n: int = Field(..., ge=1)
    t: int = Field(..., ge=2)
    q: float
    generator_tag: str
    seed: int = Field(..., ge=0, lt=2**64)
    true_spectrum: list[float]
    sample_spectrum: list[float]
    clipped: bool = Field(False, description="Population factor had negative eigenvalues clipped")

    @model_validator(mode='after')
    def validate_spectra(self) -> 'SampleRecord':
        """Both spectra sorted, nonnegative and of trace N."""
        NoiseRatio(n=self.n, t=self.t)
        if not math.isclose(self.q, self.n / self.t, rel_tol=1e-12):
            raise ValueError(f"q must equal N/T = {self.n / self.t}")
        if self.generator_tag not in GENERATOR_TAGS:
            raise ValueError(f"generator_tag must be one of: {', '.join(GENERATOR_TAGS)}")

        for name, values, tolerance in (
            ("true_spectrum", self.true_spectrum, SPECTRUM_SUM_TOLERANCE),
            ("sample_spectrum", self.sample_spectrum, SAMPLE_SUM_TOLERANCE),
        ):
            if len(values) != self.n:
                raise ValueError(f"{name} must have length n = {self.n}")
            _check_spectrum(values, name)
            if abs(sum(values) - self.n) > tolerance * self.n:
                raise ValueError(f"{name} must sum to n = {self.n}")
        return self

    @property
    def noise(self) -> NoiseRatio:
        return NoiseRatio(n=self.n, t=self.t)


class DatasetManifest(BaseModel):
    """Everything needed to regenerate a dataset file byte for byte."""
    n: int = Field(..., ge=2)
    t_min: int
    t_max: int
    method_mix: dict[str, float]
    count: int = Field(..., ge=1)
    master_seed: int = Field(..., ge=0, lt=2**64)
    format_version: int = Field(DATASET_FORMAT_VERSION, ge=1, le=DATASET_FORMAT_VERSION)
    direct_spectrum: bool = Field(
        True, description="Sample spectrum-sketch records through the eigenvalue-only path")
    retry_budget: int = Field(5, ge=0)

    @model_validator(mode='after')
    def validate_ranges(self) -> 'DatasetManifest':
        """T range must start at N and the mix must be a distribution over known generators."""
        if self.t_min < self.n:
            raise ValueError(f"t_min must be >= n = {self.n} (q <= 1)")
        if self.t_max < self.t_min:
            raise ValueError("t_max must be >= t_min")
        unknown = set(self.method_mix) - set(GENERATOR_TAGS)
        if unknown:
            raise ValueError(f"unknown generator(s) in method_mix: {', '.join(sorted(unknown))}")
        if any(w < 0.0 for w in self.method_mix.values()):
            raise ValueError("method_mix weights must be nonnegative")
        if abs(sum(self.method_mix.values()) - 1.0) > 1e-9:
            raise ValueError("method_mix weights must sum to 1")
        return self


class EvalRow(BaseModel):
    t: int = Field(..., ge=2)
    q: float = Field(..., gt=0.0, le=1.0)
    mse_sample: float = Field(..., ge=0.0)
    mse_rie: float = Field(..., ge=0.0)
    mse_model: float = Field(..., ge=0.0)
    count: int = Field(..., ge=1)


class EvalReport(BaseModel):
    """Per-T MSE rows plus aggregate means and standard errors across rows."""
    rows: list[EvalRow]
    mean_mse_sample: float = 0.0
    mean_mse_rie: float = 0.0
    mean_mse_model: float = 0.0
    se_mse_sample: float = 0.0
    se_mse_rie: float = 0.0
    se_mse_model: float = 0.0

    @model_validator(mode='after')
    def compute_aggregates(self) -> 'EvalReport':
        """Aggregates are always recomputed from the rows."""
        for name in ("sample", "rie", "model"):
            values = [getattr(row, f"mse_{name}") for row in self.rows]
            mean, se = _mean_and_se(values)
            setattr(self, f"mean_mse_{name}", mean)
            setattr(self, f"se_mse_{name}", se)
        return self

    def rows_where_model_beats_rie(self) -> int:
        return sum(1 for row in self.rows if row.mse_model < row.mse_rie)


def _mean_and_se(values: list[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    mean = sum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0
    variance = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, math.sqrt(variance / len(values))


def _first_error(model: type[BaseModel], data: Mapping[str, Any]) -> Optional[str]:
    try:
        model(**data)
        return None
    except ValidationError as e:
        errors = e.errors()
        if not errors:
            return "Unknown validation error"
        error = errors[0]
        location = ".".join(str(loc) for loc in error["loc"]) or "__root__"
        return f"Validation error at '{location}': {error['msg']}"


def validate_record(data: Mapping[str, Any]) -> Optional[str]:
    """
    Validate a dataset record dictionary.

    Args:
        data: Parsed record

    Returns:
        An error message string if invalid, or None if valid
    """
    return _first_error(SampleRecord, data)


def validate_manifest(data: Mapping[str, Any]) -> Optional[str]:
    """
    Validate a dataset manifest dictionary.

    Args:
        data: Parsed manifest

    Returns:
        An error message string if invalid, or None if valid
    """
    return _first_error(DatasetManifest, data)
