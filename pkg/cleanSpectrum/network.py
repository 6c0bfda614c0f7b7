#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Dense feed-forward denoising autoencoder on eigenvalue spectra.

Two variants share the code:
- plain: sorted sample spectrum (N) -> estimated true spectrum (N),
- adjusted: sorted sample spectrum followed by q (N + 1) -> true spectrum (N).

Hidden layers use the rectifier, the output layer is linear, and the second
hidden layer carries inverted dropout. Gradients are computed by explicit
backpropagation of the mean squared error.
"""

import copy
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from tqdm import tqdm

from cleanSpectrum.errors import DimensionMismatchError, DivergenceError, PreconditionError
from cleanSpectrum.matcore import Rng
from cleanSpectrum.performance import timed_function
from cleanSpectrum.rie import count_inversions
from cleanSpectrum.validators import (
    Activation, LayerSpec, OptimizerKind, SampleRecord, TrainConfig
)

# Configure logger
logger = logging.getLogger(__name__)

DEFAULT_HIDDEN = (300, 200)
DEFAULT_DROPOUT = 0.25
# Dropout sits after this hidden layer (0-based)
DROPOUT_LAYER = 1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

GRADIENT_CHECK_STEP = 1e-5


class ModelVariant(str, Enum):
    PLAIN = "plain"
    ADJUSTED = "adjusted"


@dataclass(frozen=True)
class TrainMode:
    """Training pass: dropout masks are drawn from rng."""
    rng: Rng


@dataclass(frozen=True)
class InferMode:
    """Deterministic pass without dropout."""


INFER = InferMode()
Mode = Union[TrainMode, InferMode]


@dataclass
class Gradients:
    """Loss gradients, one array per layer weight and bias."""
    weights: list[NDArray[np.float64]]
    biases: list[NDArray[np.float64]]
    loss: float


@dataclass
class _ForwardCache:
    inputs: list[NDArray[np.float64]] = field(default_factory=list)
    pre_activations: list[NDArray[np.float64]] = field(default_factory=list)
    masks: list[Optional[NDArray[np.float64]]] = field(default_factory=list)


class MlpModel:
    """
    Stack of dense layers y = a(Wx + b).

    Weights are stored as (fan_out, fan_in) matrices and act on column
    vectors; batches are processed as rows.
    """

    def __init__(
        self,
        layers: Sequence[LayerSpec],
        weights: Sequence[NDArray[np.float64]],
        biases: Sequence[NDArray[np.float64]],
        variant: ModelVariant = ModelVariant.ADJUSTED,
        tied: bool = False,
    ):
        self.layers = list(layers)
        self.weights = [np.array(w, dtype=np.float64) for w in weights]
        self.biases = [np.array(b, dtype=np.float64) for b in biases]
        self.variant = ModelVariant(variant)
        self.tied = tied
        self._validate()
        self.tied_partners = self._tied_partners() if tied else {}
        self.sync_tied()

    def _validate(self) -> None:
        if not self.layers:
            raise PreconditionError("A model needs at least one layer")
        if not len(self.layers) == len(self.weights) == len(self.biases):
            raise DimensionMismatchError("One weight matrix and one bias per layer",
                                         expected=len(self.layers), actual=len(self.weights))
        for k, (spec, w, b) in enumerate(zip(self.layers, self.weights, self.biases)):
            if w.shape != (spec.fan_out, spec.fan_in) or b.shape != (spec.fan_out,):
                raise DimensionMismatchError(f"Layer {k} parameters do not match its spec",
                                             expected=(spec.fan_out, spec.fan_in), actual=w.shape)
            if k > 0 and self.layers[k - 1].fan_out != spec.fan_in:
                raise DimensionMismatchError(f"Layer {k} fan_in does not match layer {k - 1} fan_out",
                                             expected=self.layers[k - 1].fan_out, actual=spec.fan_in)

        expected_input = self.output_dim + (1 if self.variant is ModelVariant.ADJUSTED else 0)
        if self.input_dim != expected_input:
            raise DimensionMismatchError(
                f"{self.variant.value} model needs input_dim = {expected_input}",
                expected=expected_input, actual=self.input_dim)

    def _tied_partners(self) -> dict[int, int]:
        """Map each decoder layer to the encoder layer whose transpose it uses."""
        if self.variant is not ModelVariant.PLAIN:
            raise PreconditionError("Tied weights need the plain variant (input width == output width)")
        widths = [self.input_dim] + [spec.fan_out for spec in self.layers]
        if widths != widths[::-1]:
            raise PreconditionError(f"Tied weights need a mirrored architecture, got widths {widths}",
                                    condition="widths == reversed(widths)")
        count = len(self.layers)
        return {count - 1 - k: k for k in range(count // 2)}

    def sync_tied(self) -> None:
        """Copy encoder weights (transposed) into their decoder partners."""
        for follower, leader in self.tied_partners.items():
            self.weights[follower] = self.weights[leader].T.copy()

    @classmethod
    def build(
        cls,
        n: int,
        rng: Rng,
        hidden: Sequence[int] = DEFAULT_HIDDEN,
        dropout: float = DEFAULT_DROPOUT,
        variant: ModelVariant = ModelVariant.ADJUSTED,
        tied: bool = False,
    ) -> "MlpModel":
        """
        Create a freshly initialized model.

        Args:
            n: Spectrum length N
            rng: Random stream for the weight initialization
            hidden: Hidden layer widths
            dropout: Drop probability after the second hidden layer
            variant: plain (input N) or adjusted (input N + 1)
            tied: Share transposed weights between mirrored layers

        Returns:
            MlpModel with uniform ±sqrt(6/(fan_in + fan_out)) weights and zero biases
        """
        variant = ModelVariant(variant)
        if not 0.0 <= dropout < 1.0:
            raise PreconditionError(f"Dropout must be in [0, 1), got {dropout}", condition="0 <= dropout < 1")
        widths = [n + (1 if variant is ModelVariant.ADJUSTED else 0), *hidden, n]

        layers, weights, biases = [], [], []
        for k, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            is_output = k == len(widths) - 2
            layers.append(LayerSpec(
                fan_in=fan_in,
                fan_out=fan_out,
                activation=Activation.IDENTITY if is_output else Activation.RECTIFIER,
                dropout_keep=1.0 - dropout if k == DROPOUT_LAYER and not is_output else 1.0,
            ))
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, (fan_out, fan_in)))
            biases.append(np.zeros(fan_out))

        return cls(layers, weights, biases, variant=variant, tied=tied)

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].fan_out

    def copy(self) -> "MlpModel":
        return copy.deepcopy(self)

    def __repr__(self) -> str:
        widths = [self.input_dim] + [spec.fan_out for spec in self.layers]
        return f"MlpModel(variant={self.variant.value}, widths={widths}, tied={self.tied})"


def _activate(z: NDArray[np.float64], activation: Activation) -> NDArray[np.float64]:
    if activation is Activation.RECTIFIER:
        return np.maximum(z, 0.0)
    return z


def _as_batch(model: MlpModel, x: ArrayLike) -> tuple[NDArray[np.float64], bool]:
    array = np.asarray(x, dtype=np.float64)
    single = array.ndim == 1
    batch = array[None, :] if single else array
    if batch.ndim != 2 or batch.shape[1] != model.input_dim:
        raise DimensionMismatchError("Input length does not match the model input dimension",
                                     expected=model.input_dim, actual=array.shape)
    return batch, single


def _forward(model: MlpModel, batch: NDArray[np.float64], mode: Mode) -> tuple[NDArray[np.float64], _ForwardCache]:
    cache = _ForwardCache()
    activations = batch
    for spec, w, b in zip(model.layers, model.weights, model.biases):
        cache.inputs.append(activations)
        z = activations @ w.T + b
        cache.pre_activations.append(z)
        activations = _activate(z, spec.activation)

        mask = None
        if isinstance(mode, TrainMode) and spec.dropout_keep < 1.0:
            keep = spec.dropout_keep
            mask = (mode.rng.uniform(0.0, 1.0, activations.shape) < keep) / keep
            activations = activations * mask
        cache.masks.append(mask)
    return activations, cache


def forward(model: MlpModel, x: ArrayLike, mode: Mode = INFER) -> NDArray[np.float64]:
    """
    Run the network on one input vector or a batch of rows.

    Args:
        model: Network
        x: Input of length input_dim (or a batch of such rows)
        mode: TrainMode(rng) applies inverted dropout; INFER is deterministic

    Returns:
        Output of length output_dim (or one row per input row)
    """
    batch, single = _as_batch(model, x)
    output, _ = _forward(model, batch, mode)
    return output[0] if single else output


def loss(output: ArrayLike, target: ArrayLike) -> float:
    """Mean squared error over all entries."""
    out = np.asarray(output, dtype=np.float64)
    tgt = np.asarray(target, dtype=np.float64)
    if out.shape != tgt.shape:
        raise DimensionMismatchError("Output and target lengths differ", expected=tgt.shape, actual=out.shape)
    return float(np.mean((out - tgt) ** 2))


def backward(model: MlpModel, x: ArrayLike, target: ArrayLike, mode: Mode = INFER) -> Gradients:
    """
    Exact gradients of the mean squared error for every weight and bias.

    The forward pass is recomputed inside, so a TrainMode draws its own
    dropout masks. For tied models the decoder gradient is folded into the
    encoder weight it mirrors, and the decoder entry holds its transpose.

    Args:
        model: Network
        x: Input vector or batch
        target: Target vector or batch
        mode: Dropout mode

    Returns:
        Gradients (with the loss of this pass)
    """
    batch, single = _as_batch(model, x)
    tgt = np.asarray(target, dtype=np.float64)
    tgt = tgt[None, :] if single else tgt
    output, cache = _forward(model, batch, mode)
    if tgt.shape != output.shape:
        raise DimensionMismatchError("Target shape does not match the model output",
                                     expected=output.shape, actual=tgt.shape)

    grad_weights: list[NDArray[np.float64]] = [np.empty(0)] * len(model.layers)
    grad_biases: list[NDArray[np.float64]] = [np.empty(0)] * len(model.layers)
    delta = 2.0 * (output - tgt) / output.size

    for k in reversed(range(len(model.layers))):
        spec = model.layers[k]
        if cache.masks[k] is not None:
            delta = delta * cache.masks[k]
        if spec.activation is Activation.RECTIFIER:
            delta = delta * (cache.pre_activations[k] > 0.0)
        grad_weights[k] = delta.T @ cache.inputs[k]
        grad_biases[k] = delta.sum(axis=0)
        delta = delta @ model.weights[k]

    for follower, leader in model.tied_partners.items():
        grad_weights[leader] = grad_weights[leader] + grad_weights[follower].T
        grad_weights[follower] = grad_weights[leader].T.copy()

    return Gradients(weights=grad_weights, biases=grad_biases, loss=loss(output, tgt))


def gradient_check(model: MlpModel, x: ArrayLike, target: ArrayLike,
                   step: float = GRADIENT_CHECK_STEP) -> float:
    """
    Largest relative difference between backward and central finite differences.

    Runs in INFER mode. The error of each parameter array is
    max|fd - exact| / max(max|fd|, max|exact|).
    """
    exact = backward(model, x, target, INFER)
    perturbed = model.copy()
    worst = 0.0

    def objective() -> float:
        return loss(forward(perturbed, x, INFER), target)

    groups = [(perturbed.biases, exact.biases, k) for k in range(len(perturbed.layers))]
    groups += [(perturbed.weights, exact.weights, k) for k in range(len(perturbed.layers))
               if k not in perturbed.tied_partners]

    for params, grads, k in groups:
        numeric = np.zeros_like(params[k])
        for index in np.ndindex(params[k].shape):
            original = params[k][index]
            params[k][index] = original + step
            perturbed.sync_tied()
            upper = objective()
            params[k][index] = original - step
            perturbed.sync_tied()
            lower = objective()
            params[k][index] = original
            perturbed.sync_tied()
            numeric[index] = (upper - lower) / (2.0 * step)
        scale = max(float(np.max(np.abs(numeric))), float(np.max(np.abs(grads[k]))))
        if scale > 0.0:
            worst = max(worst, float(np.max(np.abs(numeric - grads[k]))) / scale)
    return worst


class Optimizer:
    """Updates the free parameters of a model in place."""

    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def _free(self, model: MlpModel, grads: Gradients) -> list[tuple[NDArray[np.float64], NDArray[np.float64]]]:
        pairs = [(model.weights[k], grads.weights[k]) for k in range(len(model.layers))
                 if k not in model.tied_partners]
        pairs += list(zip(model.biases, grads.biases))
        return pairs

    def step(self, model: MlpModel, grads: Gradients) -> None:
        for index, (param, grad) in enumerate(self._free(model, grads)):
            param -= self._update(index, grad)
        model.sync_tied()

    def _update(self, index: int, grad: NDArray[np.float64]) -> NDArray[np.float64]:
        raise NotImplementedError


class Sgd(Optimizer):
    def _update(self, index: int, grad: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.learning_rate * grad


class Adam(Optimizer):
    """Adaptive moment estimation with bias correction."""

    def __init__(self, learning_rate: float, beta1: float = ADAM_BETA1,
                 beta2: float = ADAM_BETA2, epsilon: float = ADAM_EPSILON):
        super().__init__(learning_rate)
        self.beta1, self.beta2, self.epsilon = beta1, beta2, epsilon
        self.first: dict[int, NDArray[np.float64]] = {}
        self.second: dict[int, NDArray[np.float64]] = {}
        self.steps = 0

    def step(self, model: MlpModel, grads: Gradients) -> None:
        self.steps += 1
        super().step(model, grads)

    def _update(self, index: int, grad: NDArray[np.float64]) -> NDArray[np.float64]:
        m = self.first.get(index, np.zeros_like(grad))
        v = self.second.get(index, np.zeros_like(grad))
        m = self.beta1 * m + (1.0 - self.beta1) * grad
        v = self.beta2 * v + (1.0 - self.beta2) * grad * grad
        self.first[index], self.second[index] = m, v
        m_hat = m / (1.0 - self.beta1 ** self.steps)
        v_hat = v / (1.0 - self.beta2 ** self.steps)
        return self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


def make_optimizer(cfg: TrainConfig) -> Optimizer:
    if cfg.optimizer is OptimizerKind.SGD:
        return Sgd(cfg.learning_rate)
    return Adam(cfg.learning_rate)


def model_input(variant: ModelVariant, sample_spectrum: ArrayLike, q: float) -> NDArray[np.float64]:
    """Ascending spectrum, followed by q for the adjusted variant."""
    values = np.sort(np.asarray(sample_spectrum, dtype=np.float64))
    if ModelVariant(variant) is ModelVariant.ADJUSTED:
        return np.append(values, q)
    return values


def records_to_arrays(records: Iterable[SampleRecord], variant: ModelVariant
                      ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Stack records into (inputs, targets) rows."""
    inputs, targets = [], []
    for record in records:
        inputs.append(model_input(variant, record.sample_spectrum, record.q))
        targets.append(np.sort(record.true_spectrum))
    if not inputs:
        raise PreconditionError("Training needs at least one record")
    return np.vstack(inputs), np.vstack(targets)


@dataclass
class TrainResult:
    model: MlpModel
    loss_history: list[float]


@timed_function
def train(model: MlpModel, dataset: Iterable[SampleRecord], cfg: TrainConfig) -> TrainResult:
    """
    Mini-batch training on paired spectra.

    The input model is left untouched; a trained copy is returned. Given the
    same model, records (in the same order) and config the result is
    bitwise reproducible.

    Args:
        model: Initial network
        dataset: Training records
        cfg: Training configuration

    Returns:
        TrainResult with the trained model and the mean loss of every epoch

    Raises:
        DivergenceError: If a batch loss is not finite
    """
    inputs, targets = records_to_arrays(dataset, model.variant)
    if inputs.shape[1] != model.input_dim or targets.shape[1] != model.output_dim:
        raise DimensionMismatchError("Records do not match the model dimensions",
                                     expected=(model.input_dim, model.output_dim),
                                     actual=(inputs.shape[1], targets.shape[1]))

    trained = model.copy()
    optimizer = make_optimizer(cfg)
    rng = Rng(cfg.seed)
    count = inputs.shape[0]
    history: list[float] = []

    epochs = range(cfg.epochs)
    if cfg.show_progress:
        epochs = tqdm(epochs, desc="Training", unit="epoch")

    for epoch in epochs:
        order = rng.permutation(count)
        weighted_loss = 0.0
        for batch_index, start in enumerate(range(0, count, cfg.batch_size)):
            rows = order[start:start + cfg.batch_size]
            mode: Mode = TrainMode(rng) if cfg.dropout else INFER
            grads = backward(trained, inputs[rows], targets[rows], mode)
            if not np.isfinite(grads.loss):
                raise DivergenceError(
                    f"Training loss became {grads.loss} at epoch {epoch}, batch {batch_index}",
                    epoch=epoch, batch=batch_index)
            optimizer.step(trained, grads)
            weighted_loss += grads.loss * rows.size
        history.append(weighted_loss / count)
        logger.debug("Epoch %d mean loss %.6e", epoch, history[-1])

    logger.info("Trained %r on %d records for %d epochs: loss %.4e -> %.4e",
                trained, count, cfg.epochs, history[0], history[-1])
    if len(history) > 1 and history[-1] >= history[0]:
        logger.warning("Final epoch loss %.4e is not below the first epoch loss %.4e",
                       history[-1], history[0])
    return TrainResult(model=trained, loss_history=history)


@dataclass(frozen=True)
class CleanedSpectrum:
    """Ascending cleaned eigenvalues plus the number of pre-sort inversions."""
    values: NDArray[np.float64]
    inversions: int


def clean(model: MlpModel, sample_spectrum: ArrayLike, q: float, rescale: bool = True) -> CleanedSpectrum:
    """
    Estimate the true spectrum from a sample spectrum.

    Negative outputs are clamped to 0 and the result is sorted ascending.
    With rescale the output sums to N; an all-zero output is returned
    unrescaled with a warning. Plain models ignore q.

    Args:
        model: Trained network
        sample_spectrum: Sample eigenvalues of length N
        q: Noise ratio N/T
        rescale: Rescale the output to sum N

    Returns:
        CleanedSpectrum
    """
    x = model_input(model.variant, sample_spectrum, q)
    if x.size != model.input_dim:
        raise DimensionMismatchError("Spectrum length does not match the model",
                                     expected=model.output_dim, actual=len(np.atleast_1d(sample_spectrum)))
    raw = np.maximum(forward(model, x, INFER), 0.0)
    inversions = count_inversions(raw)
    values = np.sort(raw)

    if rescale:
        total = float(np.sum(values))
        if total > 0.0:
            values = values * (model.output_dim / total)
        else:
            logger.warning("Model output is all zero; returning it without trace rescale")
    return CleanedSpectrum(values=values, inversions=inversions)
