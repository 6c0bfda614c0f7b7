#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Deterministic numerical core: symmetric and correlation matrices,
eigendecomposition, Haar orthogonal matrices, Givens rotations and seeded
random streams.

All matrix values are immutable after construction (read-only numpy arrays)
and can be shared between threads. An Rng is owned by one caller at a time;
parallel work gets its own stream through Rng.derive.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from cleanSpectrum.errors import (
    ConvergenceError, DimensionMismatchError, PreconditionError, SingularMatrixError
)

# Configure logger
logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-10
UNIT_DIAGONAL_TOLERANCE = 1e-8
PSD_TOLERANCE = 1e-8
ENTRY_BOUND_TOLERANCE = 1e-10

JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100

EigenMethod = Literal["lapack", "jacobi"]

# Backend used when callers do not ask for one; set from Settings.eigen_method by the CLI
DEFAULT_EIGEN_METHOD: EigenMethod = "lapack"


def _frozen(array: NDArray[np.float64]) -> NDArray[np.float64]:
    array.setflags(write=False)
    return array


class Rng:
    """
    Seeded random stream.

    Wraps numpy's PCG64 bit generator; normal variates use numpy's ziggurat
    transform. Equal seeds give equal streams.
    """

    def __init__(self, seed: int):
        if seed < 0 or seed >= 2**64:
            raise PreconditionError(f"Seed must be a 64-bit unsigned integer, got {seed}",
                                    condition="0 <= seed < 2**64")
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, *keys: int) -> "Rng":
        """
        Build an independent stream from this stream's seed and integer keys.

        Args:
            *keys: Nonnegative integers (record index, attempt, grid value...)

        Returns:
            A new Rng; this stream is not advanced
        """
        return Rng(derive_seed(self.seed, *keys))

    def normal(self, size: int | tuple[int, ...]) -> NDArray[np.float64]:
        return self.generator.standard_normal(size)

    def uniform(self, low: float = 0.0, high: float = 1.0,
                size: Optional[int | tuple[int, ...]] = None):
        return self.generator.uniform(low, high, size)

    def integers(self, low: int, high: int, size: Optional[int] = None):
        """Uniform integers in the inclusive range [low, high]."""
        return self.generator.integers(low, high, size=size, endpoint=True)

    def choice(self, n: int, size: int, replace: bool = True, p: Optional[ArrayLike] = None):
        return self.generator.choice(n, size=size, replace=replace, p=p)

    def permutation(self, n: int) -> NDArray[np.int64]:
        return self.generator.permutation(n)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed})"


def derive_seed(master_seed: int, *keys: int) -> int:
    """
    Derive a 64-bit seed from a master seed and integer keys.

    Args:
        master_seed: Root seed
        *keys: Nonnegative integer keys

    Returns:
        A 64-bit unsigned integer seed
    """
    sequence = np.random.SeedSequence([int(master_seed), *[int(k) for k in keys]])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SymMatrix:
    """Dense real symmetric matrix; symmetry is exact after construction."""
    entries: NDArray[np.float64]

    def __post_init__(self) -> None:
        array = np.array(self.entries, dtype=np.float64)
        if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] < 1:
            raise DimensionMismatchError(
                f"A symmetric matrix must be square with dim >= 1, got shape {array.shape}",
                expected="(N, N)", actual=array.shape)
        if not np.all(np.isfinite(array)):
            raise PreconditionError("Matrix entries must be finite")
        asymmetry = float(np.max(np.abs(array - array.T)))
        scale = max(1.0, float(np.max(np.abs(array))))
        if asymmetry > SYMMETRY_TOLERANCE * scale:
            raise PreconditionError(
                f"Matrix is not symmetric (max |a_ij - a_ji| = {asymmetry:.3e})",
                condition="entries[i][j] == entries[j][i]")
        object.__setattr__(self, "entries", _frozen(0.5 * (array + array.T)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def diagonal(self) -> NDArray[np.float64]:
        return np.diagonal(self.entries).copy()

    def eigenvalues(self) -> NDArray[np.float64]:
        """Ascending eigenvalues."""
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True)
class CorrelationMatrix:
    """
    Symmetric positive semidefinite matrix with unit diagonal.

    Off-diagonal entries lie in [-1, 1]: for any PSD matrix with unit
    diagonal, (e_i - e_j)ᵗA(e_i - e_j) >= 0 and (e_i + e_j)ᵗA(e_i + e_j) >= 0
    give |a_ij| <= 1.
    """
    inner: SymMatrix

    def __post_init__(self) -> None:
        entries = self.inner.entries
        diagonal_error = float(np.max(np.abs(np.diagonal(entries) - 1.0)))
        if diagonal_error > UNIT_DIAGONAL_TOLERANCE:
            raise PreconditionError(
                f"Correlation matrix diagonal deviates from 1 by {diagonal_error:.3e}",
                condition="|diag - 1| <= 1e-8")
        max_entry = float(np.max(np.abs(entries)))
        if max_entry > 1.0 + ENTRY_BOUND_TOLERANCE:
            raise PreconditionError(
                f"Correlation entries must lie in [-1, 1], found |entry| = {max_entry:.12f}",
                condition="|entries[i][j]| <= 1")
        smallest = float(self.inner.eigenvalues()[0])
        if smallest < -PSD_TOLERANCE:
            raise PreconditionError(
                f"Correlation matrix is not positive semidefinite (smallest eigenvalue {smallest:.3e})",
                condition="lambda_min >= -1e-8")

    @classmethod
    def from_array(cls, array: ArrayLike) -> "CorrelationMatrix":
        return cls(SymMatrix(np.asarray(array, dtype=np.float64)))

    @property
    def entries(self) -> NDArray[np.float64]:
        return self.inner.entries

    @property
    def dim(self) -> int:
        return self.inner.dim

    def spectrum(self) -> NDArray[np.float64]:
        """Ascending eigenvalues (they sum to N)."""
        return self.inner.eigenvalues()


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with their orthonormal eigenvectors as columns."""
    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]

    def reconstruct(self) -> NDArray[np.float64]:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def eigen_sym(a: SymMatrix, method: Optional[EigenMethod] = None) -> EigenDecomposition:
    """
    Eigendecomposition of a symmetric matrix.

    Args:
        a: Symmetric matrix
        method: "jacobi" (cyclic Jacobi rotations) or "lapack" (numpy.linalg.eigh);
            defaults to DEFAULT_EIGEN_METHOD

    Returns:
        EigenDecomposition with ascending eigenvalues

    Raises:
        ConvergenceError: If the Jacobi sweeps do not reach the tolerance
    """
    method = method or DEFAULT_EIGEN_METHOD
    if method == "jacobi":
        values, vectors = _jacobi_eigen(np.array(a.entries))
    elif method == "lapack":
        values, vectors = np.linalg.eigh(a.entries)
    else:
        raise PreconditionError(f"Unknown eigen method '{method}'", condition="method in {lapack, jacobi}")

    order = np.argsort(values, kind="stable")
    return EigenDecomposition(
        eigenvalues=_frozen(np.ascontiguousarray(values[order])),
        eigenvectors=_frozen(np.ascontiguousarray(vectors[:, order])),
    )


def _jacobi_eigen(a: NDArray[np.float64],
                  tol: float = JACOBI_TOLERANCE,
                  max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Cyclic Jacobi eigenvalue iteration on a copy of a."""
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))

    def off_norm() -> float:
        return float(np.sqrt(max(np.sum(a * a) - np.sum(np.diagonal(a) ** 2), 0.0)))

    for sweep in range(max_sweeps):
        residual = off_norm()
        if residual <= tol * scale:
            logger.debug("Jacobi converged after %d sweeps (off-diagonal %.3e)", sweep, residual)
            return np.diagonal(a).copy(), v

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    residual = off_norm()
    if residual <= tol * scale:
        return np.diagonal(a).copy(), v
    raise ConvergenceError(
        f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
        f"(off-diagonal norm {residual:.3e})",
        residual=residual,
    )


def random_orthogonal(n: int, rng: Rng) -> NDArray[np.float64]:
    """
    Draw a Haar-distributed orthogonal matrix.

    Gaussian matrix, Householder QR, then column signs flipped so the
    triangular factor has a positive diagonal.

    Args:
        n: Dimension (>= 1)
        rng: Random stream

    Returns:
        n x n orthogonal matrix
    """
    if n < 1:
        raise PreconditionError(f"Dimension must be >= 1, got {n}", condition="n >= 1")
    gaussian = rng.normal((n, n))
    q, r = np.linalg.qr(gaussian)
    signs = np.sign(np.diagonal(r))
    signs[signs == 0.0] = 1.0
    return q * signs


def givens_tangent(m_ii: float, m_ij: float, m_jj: float) -> float:
    """
    Tangent of the rotation that sets entry (i, i) to one.

    Root t = (m_ij + sqrt(D)) / (m_jj - 1) with D = m_ij² - (m_ii - 1)(m_jj - 1).
    For m_ij < 0 the same root is computed as (m_ii - 1) / (m_ij - sqrt(D)),
    which avoids cancellation in the numerator.
    """
    discriminant = m_ij * m_ij - (m_ii - 1.0) * (m_jj - 1.0)
    root = np.sqrt(discriminant)
    if m_ij >= 0.0:
        return (m_ij + root) / (m_jj - 1.0)
    return (m_ii - 1.0) / (m_ij - root)


def givens_fix(m: SymMatrix, i: int, j: int) -> SymMatrix:
    """
    Rotate the (i, j) plane so that entry (i, i) becomes exactly 1.

    Args:
        m: Symmetric matrix whose diagonal entries i and j straddle 1
        i: Index of the entry driven to 1
        j: Partner index

    Returns:
        Rotated symmetric matrix with the same eigenvalues

    Raises:
        PreconditionError: If m[j][j] == 1, the discriminant is negative or
            the diagonal entries do not straddle 1
    """
    n = m.dim
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise PreconditionError(f"Invalid rotation plane ({i}, {j}) for dim {n}",
                                condition="0 <= i != j < N")
    a = np.array(m.entries)
    m_ii, m_ij, m_jj = a[i, i], a[i, j], a[j, j]

    if m_jj == 1.0:
        raise PreconditionError("Givens rotation undefined: m[j][j] == 1 (division by zero)",
                                condition="m[j][j] != 1")
    discriminant = m_ij * m_ij - (m_ii - 1.0) * (m_jj - 1.0)
    if discriminant < 0.0:
        raise PreconditionError(
            f"Givens rotation undefined: negative discriminant {discriminant:.3e}",
            condition="m_ij^2 >= (m_ii - 1)(m_jj - 1)")
    if (m_ii - 1.0) * (m_jj - 1.0) > 0.0:
        raise PreconditionError(
            f"Diagonal entries {m_ii:.6f} and {m_jj:.6f} do not straddle 1",
            condition="(m_ii - 1)(m_jj - 1) < 0")

    t = givens_tangent(m_ii, m_ij, m_jj)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = c * t

    row_i, row_j = a[i].copy(), a[j].copy()
    a[i], a[j] = c * row_i - s * row_j, s * row_i + c * row_j
    col_i, col_j = a[:, i].copy(), a[:, j].copy()
    a[:, i], a[:, j] = c * col_i - s * col_j, s * col_i + c * col_j
    a[i, i] = 1.0

    return SymMatrix(0.5 * (a + a.T))


def condition_number(a: SymMatrix) -> float:
    """
    Ratio of the largest to the smallest eigenvalue.

    Raises:
        SingularMatrixError: If the smallest eigenvalue is <= 0
    """
    eigenvalues = eigen_sym(a).eigenvalues
    smallest, largest = float(eigenvalues[0]), float(eigenvalues[-1])
    if smallest <= 0.0:
        raise SingularMatrixError(
            f"Condition number requires a positive definite matrix (lambda_min = {smallest:.3e})")
    return largest / smallest


def max_abs_diff(a: ArrayLike, b: ArrayLike) -> float:
    """Max-norm distance between two arrays of equal shape."""
    a_arr, b_arr = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a_arr.shape != b_arr.shape:
        raise DimensionMismatchError("Shapes differ", expected=a_arr.shape, actual=b_arr.shape)
    return float(np.max(np.abs(a_arr - b_arr)))


def as_vector(values: Sequence[float] | NDArray[np.float64], name: str = "vector") -> NDArray[np.float64]:
    """Convert to a finite one-dimensional float array."""
    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 1 or array.size == 0:
        raise DimensionMismatchError(f"{name} must be a non-empty one-dimensional array",
                                     expected="(N,)", actual=array.shape)
    if not np.all(np.isfinite(array)):
        raise PreconditionError(f"{name} contains non-finite values")
    return array
