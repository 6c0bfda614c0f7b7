#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Noisy sample correlation matrices and spectra.

Data are T centered Gaussian vectors with covariance C, the sample covariance
uses the 1/T normalization without mean subtraction, and the sample
correlation divides by sqrt(var_i var_j).

The Wishart law of M = XᵗX is invariant under M -> OᵗMO, so the sample
eigenvalues depend on C only through its eigenvalues. For the isotropic case
Sigma = lambda·I the joint density of the eigenvalues l_1 >= ... >= l_p of M is

    prod_i l_i^((n-p-1)/2) exp(-l_i / (2 lambda)) prod_{i<j} (l_i - l_j)
    · pi^(p²/2) / (2^(np/2) lambda^(np/2) Gamma_p(n/2) Gamma_p(p/2)),

which is why spectra can be simulated from diag(spectrum) directly.
"""

import logging
from typing import Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, special

from cleanSpectrum.errors import DimensionMismatchError, DomainError, PreconditionError
from cleanSpectrum.generators import (
    DEFAULT_GIVENS_PRECISION, GeneratorTag, SpectrumSketch, choose_generator,
    generate_population, normalize_spectrum, parse_method_mix, sketch_spectrum
)
from cleanSpectrum.matcore import CorrelationMatrix, Rng, SymMatrix
from cleanSpectrum.validators import NoiseRatio, SampleRecord

# Configure logger
logger = logging.getLogger(__name__)


def _check_sample_count(t: int) -> None:
    if t < 2:
        raise PreconditionError(f"Sample count must be >= 2, got {t}", condition="t >= 2")


def population_factor(c: CorrelationMatrix) -> tuple[NDArray[np.float64], bool]:
    """
    Eigen-factor F = V·diag(sqrt(lambda)) with F Fᵗ = C.

    Returns:
        (F, clipped) where clipped tells whether negative eigenvalues were set to 0
    """
    eigenvalues, eigenvectors = np.linalg.eigh(c.entries)
    clipped = bool(np.any(eigenvalues < 0.0))
    if clipped:
        logger.debug("Clipping %d negative population eigenvalue(s), min %.3e",
                     int(np.sum(eigenvalues < 0.0)), float(eigenvalues[0]))
    return eigenvectors * np.sqrt(np.maximum(eigenvalues, 0.0)), clipped


def _sample_covariance(factor: NDArray[np.float64], t: int, rng: Rng) -> NDArray[np.float64]:
    n = factor.shape[0]
    x = rng.normal((t, n)) @ factor.T
    cov = (x.T @ x) / t
    return 0.5 * (cov + cov.T)


def _trace_normalized_spectrum(cov: NDArray[np.float64]) -> NDArray[np.float64]:
    values = np.maximum(np.linalg.eigvalsh(cov), 0.0)
    return values * (cov.shape[0] / float(np.sum(values)))


def draw_sample_correlation(c: CorrelationMatrix, t: int, rng: Rng) -> tuple[CorrelationMatrix, bool]:
    """sample_correlation that also reports whether the population factor was clipped."""
    _check_sample_count(t)
    factor, clipped = population_factor(c)
    cov = _sample_covariance(factor, t, rng)
    scale = np.sqrt(np.diagonal(cov))
    corr = np.clip(cov / np.outer(scale, scale), -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix(SymMatrix(corr)), clipped


def sample_correlation(c: CorrelationMatrix, t: int, rng: Rng) -> CorrelationMatrix:
    """
    Sample correlation matrix of T Gaussian observations with covariance c.

    Args:
        c: Population correlation matrix
        t: Sample count (>= 2)
        rng: Random stream

    Returns:
        CorrelationMatrix with exact unit diagonal
    """
    return draw_sample_correlation(c, t, rng)[0]


def sample_spectrum_direct(true_spectrum: SpectrumSketch, t: int, rng: Rng) -> NDArray[np.float64]:
    """
    Sample eigenvalues simulated from the population spectrum alone.

    Draws T vectors with covariance diag(true_spectrum) and returns the
    ascending eigenvalues of their sample covariance rescaled to trace N.

    Args:
        true_spectrum: Population eigenvalues (sum N)
        t: Sample count (>= 2)
        rng: Random stream

    Returns:
        Ascending eigenvalues summing to N
    """
    _check_sample_count(t)
    factor = np.diag(np.sqrt(true_spectrum.values))
    return _trace_normalized_spectrum(_sample_covariance(factor, t, rng))


def sample_covariance_spectrum(c: CorrelationMatrix, t: int, rng: Rng) -> NDArray[np.float64]:
    """Full-matrix counterpart of sample_spectrum_direct for a population matrix c."""
    _check_sample_count(t)
    factor, _ = population_factor(c)
    return _trace_normalized_spectrum(_sample_covariance(factor, t, rng))


def sample_wishart(sigma: SymMatrix, n_dof: int, rng: Rng) -> SymMatrix:
    """
    Draw M = XᵗX where X has n_dof independent rows ~ N(0, sigma).

    Raises:
        DomainError: If n_dof < 1 or sigma is not positive semidefinite
    """
    if n_dof < 1:
        raise DomainError(f"Wishart degrees of freedom must be >= 1, got {n_dof}")
    eigenvalues, eigenvectors = np.linalg.eigh(sigma.entries)
    if eigenvalues[0] < -1e-10 * max(1.0, float(eigenvalues[-1])):
        raise DomainError("Wishart covariance must be positive semidefinite")
    factor = eigenvectors * np.sqrt(np.maximum(eigenvalues, 0.0))
    x = rng.normal((n_dof, sigma.dim)) @ factor.T
    return SymMatrix(x.T @ x)


def _positive_definite_logdet(a: SymMatrix, name: str) -> float:
    try:
        cholesky = np.linalg.cholesky(a.entries)
    except np.linalg.LinAlgError as e:
        raise DomainError(f"{name} must be positive definite") from e
    return 2.0 * float(np.sum(np.log(np.diagonal(cholesky))))


def wishart_log_density(m: SymMatrix, sigma: SymMatrix, n_dof: int) -> float:
    """
    Log-density of the Wishart distribution W_p(sigma, n) at m.

    -(np/2) ln 2 - ln Gamma_p(n/2) - (n/2) ln det sigma - tr(sigma⁻¹ m)/2 + ((n-p-1)/2) ln det m

    Args:
        m: Positive definite p x p matrix
        sigma: Positive definite covariance
        n_dof: Degrees of freedom (>= p)

    Raises:
        DomainError: Non positive definite inputs or n_dof < p
        DimensionMismatchError: m and sigma of different size
    """
    p = m.dim
    if sigma.dim != p:
        raise DimensionMismatchError("m and sigma must have equal dimensions",
                                     expected=p, actual=sigma.dim)
    if n_dof < p:
        raise DomainError(f"Wishart degrees of freedom must be >= p = {p}, got {n_dof}")

    logdet_m = _positive_definite_logdet(m, "m")
    logdet_sigma = _positive_definite_logdet(sigma, "sigma")
    trace_term = float(np.trace(np.linalg.solve(sigma.entries, m.entries)))

    return float(
        -0.5 * n_dof * p * np.log(2.0)
        - special.multigammaln(0.5 * n_dof, p)
        - 0.5 * n_dof * logdet_sigma
        - 0.5 * trace_term
        + 0.5 * (n_dof - p - 1) * logdet_m
    )


def marchenko_pastur_edges(q: float) -> tuple[float, float]:
    if not 0.0 < q <= 1.0:
        raise PreconditionError(f"Marchenko-Pastur law needs a noise ratio 0 < q <= 1, got {q}",
                                condition="0 < q <= 1")
    root = np.sqrt(q)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


def marchenko_pastur_pdf(x: ArrayLike, q: float) -> NDArray[np.float64] | float:
    """
    Limiting density of sample eigenvalues for an identity population.

    sqrt((l+ - x)(x - l-)) / (2 pi q x) on [l-, l+], l± = (1 ± sqrt(q))².
    """
    lower, upper = marchenko_pastur_edges(q)
    values = np.asarray(x, dtype=np.float64)
    inside = (values > lower) & (values < upper) & (values > 0.0)
    density = np.zeros_like(values)
    xs = values[inside]
    density[inside] = np.sqrt((upper - xs) * (xs - lower)) / (2.0 * np.pi * q * xs)
    return float(density) if density.ndim == 0 else density


def marchenko_pastur_cdf(x: float, q: float) -> float:
    """Distribution function of the Marchenko-Pastur law by quadrature."""
    lower, upper = marchenko_pastur_edges(q)
    if x <= lower:
        return 0.0
    if x >= upper:
        return 1.0
    mass, _ = integrate.quad(lambda s: marchenko_pastur_pdf(s, q), lower, x, limit=200)
    return float(min(max(mass, 0.0), 1.0))


def make_record(
    n: int,
    t: int,
    method_mix: Mapping[str, float] | ArrayLike,
    rng: Rng,
    *,
    direct_spectrum: bool = True,
    precision: float = DEFAULT_GIVENS_PRECISION,
) -> SampleRecord:
    """
    Build one training example.

    A generator is chosen by the mix. Spectrum-sketch populations go through
    the eigenvalue-only path when direct_spectrum is set; every other family
    builds the population matrix and samples its correlation.

    Args:
        n: Dimension
        t: Sample count (>= n)
        method_mix: Generator weights
        rng: Random stream; its seed is stored in the record
        direct_spectrum: Use sample_spectrum_direct for spectrum sketches
        precision: Givens tolerance for specified-spectrum matrices

    Returns:
        Validated SampleRecord
    """
    noise = NoiseRatio(n=n, t=t)
    tag = choose_generator(parse_method_mix(method_mix), rng)
    clipped = False

    if tag is GeneratorTag.SPECTRUM_SKETCH and direct_spectrum:
        sketch = sketch_spectrum(n, rng)
        true_values = sketch.values
        sample_values = sample_spectrum_direct(sketch, t, rng)
    else:
        population = generate_population(n, tag, rng, precision=precision)
        true_values = normalize_spectrum(np.maximum(population.spectrum(), 0.0)).values
        sample, clipped = draw_sample_correlation(population, t, rng)
        sample_values = np.maximum(sample.spectrum(), 0.0)

    return SampleRecord(
        n=n,
        t=t,
        q=noise.q,
        generator_tag=tag.value,
        seed=rng.seed,
        true_spectrum=np.sort(true_values).tolist(),
        sample_spectrum=np.sort(sample_values).tolist(),
        clipped=clipped,
    )
