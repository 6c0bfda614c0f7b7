#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Rotational invariant estimator (RIE) of the population eigenvalues.

Each sample eigenvalue l is mapped to

    xi(l) = l / |1 - q + q·l·g(l - i0)|²

where g is the Stieltjes transform of the sample spectrum just below the
real axis. With q -> 0 the denominator goes to 1 and xi(l) = l.

Two estimates of g are available:

- kernel (default): Epanechnikov kernel density f and its Hilbert transform
  Hf, g = -pi·Hf + i·pi·f, with bandwidth T^(-1/3)·l_j around each l_j.
  Isolated eigenvalues keep a finite transform.
- resolvent: (1/N) sum_j 1/(l - i·nu - l_j) with nu = N^(-1/2). The l_j = l
  term contributes i/(N·nu), which pulls outliers towards the bulk.
"""

import logging
from enum import Enum
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from cleanSpectrum.errors import DimensionMismatchError, PoleError, PreconditionError
from cleanSpectrum.matcore import CorrelationMatrix, SymMatrix, as_vector, eigen_sym
from cleanSpectrum.validators import NoiseRatio

# Configure logger
logger = logging.getLogger(__name__)

# Share of reordered outputs above which a warning is logged
INVERSION_WARNING_SHARE = 0.01

BANDWIDTH_EXPONENT = -1.0 / 3.0
# Support of the unit-variance Epanechnikov kernel is [-sqrt(5), sqrt(5)]
KERNEL_HALF_WIDTH = float(np.sqrt(5.0))
# Scaled distance beyond which the kernel's Hilbert transform uses its 1/x expansion
FAR_FIELD = 1e3


class StieltjesEstimate(str, Enum):
    """How g(l - i0) is estimated from the sample eigenvalues."""
    KERNEL = "kernel"
    RESOLVENT = "resolvent"


_interpretation_logged = False


def _log_interpretation_once(estimate: StieltjesEstimate) -> None:
    global _interpretation_logged
    if not _interpretation_logged:
        logger.info("RIE uses the resolvent trace (1/N)Tr((zI - S)^-1) for g (%s estimate) and the "
                    "eigenvalue numerator xi(l) = l / |1 - q + q l g(l - i0)|^2", estimate.value)
        _interpretation_logged = True


def noise_value(q: NoiseRatio | float) -> float:
    """Noise ratio as a float in (0, 1]."""
    value = q.q if isinstance(q, NoiseRatio) else float(q)
    if not 0.0 < value <= 1.0:
        raise PreconditionError(f"noise ratio q must satisfy 0 < q <= 1, got {value}",
                                condition="0 < q <= 1")
    return value


def count_inversions(values: NDArray[np.float64]) -> int:
    """Number of adjacent pairs that are out of ascending order."""
    return int(np.sum(np.diff(values) < 0.0))


def stieltjes(sample_spectrum: ArrayLike, z: complex) -> complex:
    """
    Stieltjes transform (1/N) sum_i 1/(z - l_i) of a spectrum.

    Raises:
        PoleError: If z is real and equal to an eigenvalue
    """
    values = as_vector(sample_spectrum, "spectrum")
    z = complex(z)
    if z.imag == 0.0 and np.any(values == z.real):
        raise PoleError(f"Stieltjes transform has a pole at z = {z.real}", pole=z.real)
    return complex(np.mean(1.0 / (z - values)))


def _stieltjes_below_axis(values: NDArray[np.float64], nu: float,
                          leave_one_out: bool) -> NDArray[np.complex128]:
    """g(l_i - i nu) for every eigenvalue, optionally without the l_i term."""
    z = values - 1j * nu
    terms = 1.0 / (z[:, None] - values[None, :])
    if leave_one_out:
        np.fill_diagonal(terms, 0.0)
    return terms.sum(axis=1) / values.size


def epanechnikov(x: NDArray[np.float64]) -> NDArray[np.float64]:
    """Unit-variance Epanechnikov kernel."""
    return 0.75 / KERNEL_HALF_WIDTH * np.maximum(1.0 - x ** 2 / 5.0, 0.0)


def epanechnikov_hilbert(x: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Hilbert transform (1/pi) PV ∫ k(u)/(u - x) du of the Epanechnikov kernel.

    Behaves like -1/(pi·x) far from the support; that expansion is used past
    FAR_FIELD, where the closed form cancels catastrophically.
    """
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = (-0.3 * x + 0.75 / KERNEL_HALF_WIDTH * (1.0 - x ** 2 / 5.0)
                  * np.log(np.abs((KERNEL_HALF_WIDTH - x) / (KERNEL_HALF_WIDTH + x)))) / np.pi
        tail = -(1.0 + x ** -2 + (15.0 / 7.0) * x ** -4) / (np.pi * x)
    values = np.where(np.abs(x) > FAR_FIELD, tail, closed)
    # Log singularity at the support edges cancels against the vanishing kernel
    return np.where(np.abs(x) == KERNEL_HALF_WIDTH, -0.3 * x / np.pi, values)


def _stieltjes_kernel(values: NDArray[np.float64], bandwidth: float,
                      leave_one_out: bool) -> NDArray[np.complex128]:
    """Kernel estimate of g(l_i - i0); zero eigenvalues enter as exact point masses."""
    width = bandwidth * values
    smoothed = width > 0.0
    gaps = values[:, None] - values[None, :]
    safe_width = np.where(smoothed, width, 1.0)[None, :]
    x = gaps / safe_width

    with np.errstate(divide="ignore", invalid="ignore"):
        point_mass = np.where(gaps != 0.0, 1.0 / gaps, 0.0)
    real = np.where(smoothed[None, :], -np.pi * epanechnikov_hilbert(x) / safe_width, point_mass)
    imag = np.where(smoothed[None, :], np.pi * epanechnikov(x) / safe_width, 0.0)

    terms = real + 1j * imag
    if leave_one_out:
        np.fill_diagonal(terms, 0.0)
    return terms.sum(axis=1) / values.size


def rie_shrink(
    sample_spectrum: ArrayLike,
    q: NoiseRatio | float,
    *,
    estimate: StieltjesEstimate | str = StieltjesEstimate.KERNEL,
    leave_one_out: bool = False,
    nu: Optional[float] = None,
    bandwidth: Optional[float] = None,
) -> NDArray[np.float64]:
    """
    xi for each ascending sample eigenvalue, before any re-sorting or rescale.

    Args:
        sample_spectrum: Nonnegative sample eigenvalues
        q: Noise ratio N/T
        estimate: Stieltjes transform estimate, "kernel" or "resolvent"
        leave_one_out: Drop the evaluated eigenvalue from its own transform
        nu: Broadening below the real axis for the resolvent (default N^(-1/2))
        bandwidth: Global kernel bandwidth (default T^(-1/3) with T = N/q)

    Returns:
        xi values paired with the sorted input; zero eigenvalues map to 0
    """
    values = np.sort(as_vector(sample_spectrum, "sample_spectrum"))
    if np.any(values < 0.0):
        raise PreconditionError("Sample spectrum must be nonnegative", condition="spectrum >= 0")
    q_value = noise_value(q)
    estimate = StieltjesEstimate(estimate)
    n = values.size
    _log_interpretation_once(estimate)

    if estimate is StieltjesEstimate.RESOLVENT:
        g = _stieltjes_below_axis(values, n ** -0.5 if nu is None else nu, leave_one_out)
    else:
        h = (n / q_value) ** BANDWIDTH_EXPONENT if bandwidth is None else bandwidth
        if h <= 0.0:
            raise PreconditionError(f"Kernel bandwidth must be positive, got {h}", condition="bandwidth > 0")
        g = _stieltjes_kernel(values, h, leave_one_out)

    denominator = np.abs(1.0 - q_value + q_value * values * g) ** 2
    shrunk = np.zeros(n)
    positive = values > 0.0
    shrunk[positive] = values[positive] / denominator[positive]
    return shrunk


def rie_clean(
    sample_spectrum: ArrayLike,
    q: NoiseRatio | float,
    rescale: bool = True,
    leave_one_out: bool = False,
    nu: Optional[float] = None,
    estimate: StieltjesEstimate | str = StieltjesEstimate.KERNEL,
    bandwidth: Optional[float] = None,
) -> NDArray[np.float64]:
    """
    Clean a sample spectrum with the rotational invariant estimator.

    Args:
        sample_spectrum: Nonnegative sample eigenvalues
        q: Noise ratio N/T
        rescale: Rescale the output to sum N
        leave_one_out: Drop the evaluated eigenvalue from its own transform
        nu: Broadening for the resolvent estimate (default N^(-1/2))
        estimate: Stieltjes transform estimate, "kernel" or "resolvent"
        bandwidth: Global kernel bandwidth (default T^(-1/3))

    Returns:
        Ascending cleaned eigenvalues
    """
    cleaned = rie_shrink(sample_spectrum, q, estimate=estimate, leave_one_out=leave_one_out,
                         nu=nu, bandwidth=bandwidth)
    n = cleaned.size

    inversions = count_inversions(cleaned)
    if inversions:
        if inversions >= INVERSION_WARNING_SHARE * n:
            logger.warning("RIE output had %d ordering inversion(s) out of %d eigenvalues",
                           inversions, n)
        else:
            logger.debug("RIE output re-sorted (%d inversion(s))", inversions)
        cleaned = np.sort(cleaned)

    if rescale:
        total = float(np.sum(cleaned))
        if total > 0.0:
            cleaned = cleaned * (n / total)
        else:
            logger.warning("RIE output sums to zero; returning it without trace rescale")
    return cleaned


def clean_matrix(s: CorrelationMatrix, q: NoiseRatio | float, cleaned: ArrayLike) -> CorrelationMatrix:
    """
    Rebuild a correlation matrix from cleaned eigenvalues in the sample eigenbasis.

    Computes U diag(cleaned) Uᵗ with the ascending sample eigenvectors U and
    scales it back to a unit diagonal.

    Args:
        s: Sample correlation matrix
        q: Noise ratio (validated only)
        cleaned: Ascending nonnegative eigenvalues of length N

    Returns:
        CorrelationMatrix
    """
    noise_value(q)
    values = as_vector(cleaned, "cleaned")
    if values.size != s.dim:
        raise DimensionMismatchError("Cleaned spectrum length must equal the matrix dimension",
                                     expected=s.dim, actual=values.size)
    if np.any(values < 0.0):
        raise PreconditionError("Cleaned eigenvalues must be nonnegative", condition="cleaned >= 0")

    vectors = eigen_sym(s.inner).eigenvectors
    rebuilt = (vectors * np.sort(values)) @ vectors.T
    rebuilt = 0.5 * (rebuilt + rebuilt.T)

    scale = np.sqrt(np.maximum(np.diagonal(rebuilt), 0.0))
    scale[scale == 0.0] = 1.0
    corr = np.clip(rebuilt / np.outer(scale, scale), -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix(SymMatrix(corr))
