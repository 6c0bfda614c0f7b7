#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Random correlation matrix generators.

Four families feed the training data:
- specified spectrum: Qᵗ diag(a) Q with a Haar rotation Q, then Givens
  rotations until the diagonal is one (eigenvalues are kept),
- unit sphere: AAᵗ where the rows of A are uniform on the unit sphere,
- constant correlation blocks with a noisy cross-block level,
- Toeplitz (AR(1)-like) blocks plus a small Gram perturbation,
and a spectrum sketch that draws principal/other eigenvalue groups.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from cleanSpectrum.errors import ConvergenceError, PreconditionError
from cleanSpectrum.matcore import (
    CorrelationMatrix, Rng, SymMatrix, as_vector, givens_fix, random_orthogonal
)
from cleanSpectrum.validators import BlockSpec, BlockStructure

# Configure logger
logger = logging.getLogger(__name__)

SPECTRUM_SUM_TOLERANCE = 1e-9
# Tolerance of the reference Givens loop
REFERENCE_PRECISION = 0.1
DEFAULT_GIVENS_PRECISION = 1e-10
# Residual allowed when every remaining diagonal entry sits on one side of 1
DIAGONAL_DRIFT_TOLERANCE = 1e-8
ZERO_SUM_GUARD = 1e-12

MAX_BLOCKS = 5
RHO_RANGE = (0.05, 0.9)
OPEN_END_SHRINK = 0.99


class GeneratorTag(str, Enum):
    """Which generator produced a population matrix."""
    SPECTRUM_SKETCH = "spectrum_sketch"
    UNIT_SPHERE = "unit_sphere"
    CONSTANT_BLOCKS = "constant_blocks"
    TOEPLITZ_BLOCKS = "toeplitz_blocks"


@dataclass(frozen=True)
class SpectrumSketch:
    """Ascending nonnegative eigenvalues summing to N."""
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        values = as_vector(self.values, "spectrum")
        n = values.size
        if np.any(values < 0.0):
            raise PreconditionError("Spectrum values must be nonnegative", condition="values >= 0")
        total = float(np.sum(values))
        if abs(total - n) > SPECTRUM_SUM_TOLERANCE * n:
            raise PreconditionError(
                f"Spectrum must sum to N = {n}, got {total:.12g}; rescale it first",
                condition="sum(values) == N")
        values = np.sort(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size


def normalize_spectrum(values: ArrayLike) -> SpectrumSketch:
    """
    Rescale nonnegative eigenvalues so that they sum to N.

    Args:
        values: Nonnegative eigenvalues with a positive sum

    Returns:
        SpectrumSketch (sorted ascending)
    """
    array = as_vector(values, "spectrum")
    if np.any(array < 0.0):
        raise PreconditionError("Spectrum values must be nonnegative", condition="values >= 0")
    total = float(np.sum(array))
    if total <= 0.0:
        raise PreconditionError("Spectrum must have a positive sum", condition="sum(values) > 0")
    return SpectrumSketch(array.size * array / total)


def unit_diagonal_rotations(
    m: SymMatrix,
    precision: float = REFERENCE_PRECISION,
    max_rotations: Optional[int] = None,
) -> tuple[SymMatrix, int]:
    """
    Apply Givens rotations until every diagonal entry is within precision of 1.

    Each step pairs the first diagonal entry below 1 with the last entry above
    1 (swapped to the first above / last below when that order is reversed)
    and sets the first index of the pair to exactly 1.

    Args:
        m: Symmetric matrix with trace N
        precision: Stop once max |diag - 1| <= precision
        max_rotations: Rotation budget (default 10·N²)

    Returns:
        (rotated matrix, number of rotations)

    Raises:
        ConvergenceError: With the worst diagonal deviation when the budget is spent
    """
    n = m.dim
    budget = max_rotations if max_rotations is not None else 10 * n * n
    current = m
    rotations = 0

    while True:
        diagonal = current.diagonal()
        deviation = np.abs(diagonal - 1.0)
        worst = float(np.max(deviation))
        if worst <= precision:
            return current, rotations

        bigger = np.flatnonzero(diagonal > 1.0)
        smaller = np.flatnonzero(diagonal < 1.0)
        if bigger.size == 0 or smaller.size == 0:
            # Remaining deviation is rounding drift on one side of 1
            if worst <= DIAGONAL_DRIFT_TOLERANCE:
                return current, rotations
            raise ConvergenceError(
                f"Diagonal cannot be driven to 1: all deviations on one side "
                f"(worst {worst:.3e}); is the trace equal to N?",
                residual=worst)

        if rotations >= budget:
            raise ConvergenceError(
                f"Givens loop did not converge after {rotations} rotations "
                f"(worst diagonal deviation {worst:.3e})",
                residual=worst)

        i, j = int(smaller[0]), int(bigger[-1])
        if i > j:
            i, j = int(bigger[0]), int(smaller[-1])
        current = givens_fix(current, i, j)
        rotations += 1


def corr_with_spectrum(
    sketch: SpectrumSketch,
    rng: Rng,
    precision: float = DEFAULT_GIVENS_PRECISION,
) -> CorrelationMatrix:
    """
    Random correlation matrix with the given eigenvalues.

    Args:
        sketch: Target eigenvalues (sum N)
        rng: Random stream (drives the Haar rotation)
        precision: Givens loop tolerance before the final exact assignment

    Returns:
        CorrelationMatrix whose spectrum equals sketch.values
    """
    n = sketch.n
    # Sketches may miss sum N by up to SPECTRUM_SUM_TOLERANCE·N; the rotations need the exact trace
    values = sketch.values * (n / float(np.sum(sketch.values)))
    q = random_orthogonal(n, rng)
    m = SymMatrix((q.T * values) @ q)

    rotated, rotations = unit_diagonal_rotations(m, precision=precision)
    logger.debug("Specified-spectrum matrix (n=%d) needed %d Givens rotations", n, rotations)

    entries = np.array(rotated.entries)
    np.fill_diagonal(entries, 1.0)
    return CorrelationMatrix(SymMatrix(0.5 * (entries + entries.T)))


def _unit_vectors(count: int, dim: int, rng: Rng) -> NDArray[np.float64]:
    """Rows uniform on the unit sphere (normalized Gaussians)."""
    while True:
        gaussian = rng.normal((count, dim))
        norms = np.linalg.norm(gaussian, axis=1, keepdims=True)
        if np.all(norms > 0.0):
            return gaussian / norms


def corr_unit_sphere(n: int, rng: Rng) -> CorrelationMatrix:
    """
    Correlation matrix AAᵗ with rows of A uniform on the unit sphere.

    Args:
        n: Dimension (>= 1)
        rng: Random stream

    Returns:
        CorrelationMatrix with exact unit diagonal
    """
    if n < 1:
        raise PreconditionError(f"Dimension must be >= 1, got {n}", condition="n >= 1")
    a = _unit_vectors(n, n, rng)
    gram = a @ a.T
    gram = 0.5 * (gram + gram.T)
    np.fill_diagonal(gram, 1.0)
    return CorrelationMatrix(SymMatrix(np.clip(gram, -1.0, 1.0)))


def block_membership(block_sizes: list[int]) -> NDArray[np.int64]:
    """Block index of every coordinate."""
    return np.repeat(np.arange(len(block_sizes)), block_sizes)


def corr_blocks(spec: BlockSpec, rng: Rng) -> CorrelationMatrix:
    """
    Correlation matrix built from constant or Toeplitz blocks.

    Constant blocks: entry (i, j) is rho_k + eps·x_iᵗx_j inside block k and
    delta + eps·x_iᵗx_j across blocks. Toeplitz blocks: Sigma + eps(XᵗX - I)
    with Sigma block-diagonal, entries rho_k^|i-j|. The x_i are uniform unit
    vectors in dimension n.

    Args:
        spec: Validated block parameters
        rng: Random stream

    Returns:
        CorrelationMatrix within the condition-number bound of condition_bound(spec)
    """
    n = spec.n
    x = _unit_vectors(n, n, rng)
    gram = x @ x.T
    members = block_membership(spec.block_sizes)
    same_block = members[:, None] == members[None, :]
    rhos = np.asarray(spec.block_rhos)

    if spec.structure is BlockStructure.CONSTANT:
        base = np.where(same_block, rhos[members][:, None], spec.delta)
        corr = base + spec.epsilon * gram
    else:
        offsets = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
        toeplitz = np.where(same_block, rhos[members][:, None] ** offsets, 0.0)
        corr = toeplitz + spec.epsilon * (gram - np.eye(n))

    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix(SymMatrix(corr))


def condition_bound(spec: BlockSpec) -> float:
    """
    Upper bound on the condition number of corr_blocks(spec).

    Constant blocks: (n(1 + eps) + 1) / (1 - rho_max - eps).
    Toeplitz blocks: ((1 + rho_max)/(1 - rho_max) + (n - 1)eps) / ((1 - rho_max)/(1 + rho_max) - eps).
    """
    n, eps, rho_max = spec.n, spec.epsilon, max(spec.block_rhos)
    if spec.structure is BlockStructure.CONSTANT:
        return (n * (1.0 + eps) + 1.0) / (1.0 - rho_max - eps)
    return (((1.0 + rho_max) / (1.0 - rho_max) + (n - 1) * eps)
            / ((1.0 - rho_max) / (1.0 + rho_max) - eps))


def _scaled_uniforms(count: int, total: float, rng: Rng) -> NDArray[np.float64]:
    """count uniform [0, 1) draws scaled to sum to total (empty when count is 0)."""
    if count == 0:
        return np.empty(0)
    while True:
        draws = rng.uniform(0.0, 1.0, count)
        draws_sum = float(np.sum(draws))
        if draws_sum >= ZERO_SUM_GUARD:
            return draws * (total / draws_sum)


def sketch_spectrum(
    n: int,
    rng: Rng,
    *,
    p: Optional[float] = None,
    l: Optional[int] = None,
) -> SpectrumSketch:
    """
    Draw a random spectrum split into principal and other eigenvalues.

    p ~ U[0, 1] is the share of variance of the l ~ U{1..n} principal values;
    both groups are uniform draws scaled to p and 1 - p, then everything is
    scaled to sum n. With l == n the other group is empty.

    Args:
        n: Dimension (>= 2)
        rng: Random stream
        p: Fixed variance share instead of a draw
        l: Fixed principal count instead of a draw

    Returns:
        SpectrumSketch
    """
    if n < 2:
        raise PreconditionError(f"Spectrum sketch needs n >= 2, got {n}", condition="n >= 2")
    if p is None:
        p = float(rng.uniform(0.0, 1.0))
    if l is None:
        l = int(rng.integers(1, n))
    if not 0.0 <= p <= 1.0 or not 1 <= l <= n:
        raise PreconditionError(f"Invalid sketch parameters p={p}, l={l}",
                                condition="0 <= p <= 1 and 1 <= l <= n")

    principal = _scaled_uniforms(l, p, rng)
    others = _scaled_uniforms(n - l, 1.0 - p, rng)
    values = np.concatenate([principal, others])
    total = float(np.sum(values))
    if total < ZERO_SUM_GUARD:
        # p == 0 with l == n leaves nothing to scale
        values = np.ones(n)
        total = float(n)
    return SpectrumSketch(values * (n / total))


def _random_composition(n: int, k: int, rng: Rng) -> list[int]:
    """Split n into k positive parts uniformly over compositions."""
    if k == 1:
        return [n]
    cuts = np.sort(rng.choice(n - 1, size=k - 1, replace=False) + 1)
    edges = np.concatenate([[0], cuts, [n]])
    return [int(size) for size in np.diff(edges)]


def random_block_spec(n: int, structure: BlockStructure, rng: Rng) -> BlockSpec:
    """
    Draw block parameters uniformly from their admissible ranges.

    K ~ U{1..min(5, n)}, sizes by random composition, rho_k ~ U[0.05, 0.9],
    delta ~ U[0, rho_min), epsilon uniform over the admissible interval with
    the open end shrunk by 1%.
    """
    k = int(rng.integers(1, min(MAX_BLOCKS, n)))
    sizes = _random_composition(n, k, rng)
    rhos = [float(rho) for rho in rng.uniform(RHO_RANGE[0], RHO_RANGE[1], k)]
    rho_min, rho_max = min(rhos), max(rhos)
    delta = float(rng.uniform(0.0, rho_min))

    if structure is BlockStructure.CONSTANT:
        epsilon = float(rng.uniform(0.0, OPEN_END_SHRINK * (1.0 - rho_max)))
    else:
        upper = OPEN_END_SHRINK * (1.0 - rho_max) / (1.0 + rho_max)
        epsilon = 0.0
        while epsilon == 0.0:
            epsilon = float(rng.uniform(0.0, upper))

    return BlockSpec(
        block_sizes=sizes,
        block_rhos=rhos,
        delta=delta,
        epsilon=epsilon,
        structure=structure,
    )


def parse_method_mix(mix: Mapping[str, float] | ArrayLike) -> NDArray[np.float64]:
    """
    Normalize a method mix into weights ordered like GeneratorTag.

    Args:
        mix: Mapping tag name -> weight, or four weights in tag order

    Returns:
        Weights array of length 4
    """
    tags = list(GeneratorTag)
    if isinstance(mix, Mapping):
        unknown = set(mix) - {tag.value for tag in tags}
        if unknown:
            raise PreconditionError(f"Unknown generator(s) in method mix: {sorted(unknown)}")
        weights = np.array([float(mix.get(tag.value, 0.0)) for tag in tags])
    else:
        weights = np.asarray(mix, dtype=np.float64)
    if weights.shape != (len(tags),):
        raise PreconditionError(f"Method mix needs {len(tags)} weights, got {weights.shape}")
    if np.any(weights < 0.0) or abs(float(np.sum(weights)) - 1.0) > 1e-9:
        raise PreconditionError("Method mix weights must be nonnegative and sum to 1",
                                condition="weights >= 0 and sum(weights) == 1")
    return weights


def choose_generator(weights: NDArray[np.float64], rng: Rng) -> GeneratorTag:
    """Draw a generator tag according to the weights."""
    index = int(rng.choice(len(weights), size=1, p=weights)[0])
    return list(GeneratorTag)[index]


def generate_population(n: int, tag: GeneratorTag, rng: Rng,
                        precision: float = DEFAULT_GIVENS_PRECISION) -> CorrelationMatrix:
    """Run one generator family."""
    if tag is GeneratorTag.SPECTRUM_SKETCH:
        return corr_with_spectrum(sketch_spectrum(n, rng), rng, precision=precision)
    if tag is GeneratorTag.UNIT_SPHERE:
        return corr_unit_sphere(n, rng)
    structure = (BlockStructure.CONSTANT if tag is GeneratorTag.CONSTANT_BLOCKS
                 else BlockStructure.TOEPLITZ)
    return corr_blocks(random_block_spec(n, structure, rng), rng)


def random_corr(
    n: int,
    method_mix: Mapping[str, float] | ArrayLike,
    rng: Rng,
    precision: float = DEFAULT_GIVENS_PRECISION,
) -> tuple[CorrelationMatrix, GeneratorTag]:
    """
    Random correlation matrix from a mix of generator families.

    Args:
        n: Dimension
        method_mix: Weights over spectrum_sketch, unit_sphere, constant_blocks, toeplitz_blocks
        rng: Random stream
        precision: Givens tolerance for the specified-spectrum family

    Returns:
        (matrix, tag of the generator that produced it)
    """
    weights = parse_method_mix(method_mix)
    tag = choose_generator(weights, rng)
    return generate_population(n, tag, rng, precision=precision), tag
