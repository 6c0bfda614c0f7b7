#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Text serialization of MlpModel.

File layout (one item per line, space separated):

    cleanspectrum-mlp 1
    variant adjusted
    tied 0
    layers 3
    layer <fan_in> <fan_out> <activation> <dropout_keep>    (one per layer)
    weights <k> <row-major values>                           (one per layer)
    biases <k> <values>                                      (one per layer)
    checksum sha256 <hex digest of every preceding byte>

Floats are written with repr(), the shortest decimal that reads back to the
same double, so a save/load round trip is bit-exact.
"""

import hashlib
import logging
from pathlib import Path
from typing import Union

import numpy as np

from cleanSpectrum.config import DATASET_ENCODING
from cleanSpectrum.errors import FileOperationError, SerializationError
from cleanSpectrum.network import MlpModel, ModelVariant
from cleanSpectrum.validators import Activation, LayerSpec

# Configure logger
logger = logging.getLogger(__name__)

FORMAT_NAME = "cleanspectrum-mlp"
FORMAT_VERSION = 1


def _floats(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in values.ravel())


def dumps_model(model: MlpModel) -> str:
    """Serialize a model to the text format, checksum line included."""
    lines = [
        f"{FORMAT_NAME} {FORMAT_VERSION}",
        f"variant {model.variant.value}",
        f"tied {int(model.tied)}",
        f"layers {len(model.layers)}",
    ]
    for spec in model.layers:
        lines.append(f"layer {spec.fan_in} {spec.fan_out} {spec.activation.value} {spec.dropout_keep!r}")
    for k, w in enumerate(model.weights):
        lines.append(f"weights {k} {_floats(w)}")
    for k, b in enumerate(model.biases):
        lines.append(f"biases {k} {_floats(b)}")

    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode(DATASET_ENCODING)).hexdigest()
    return body + f"checksum sha256 {digest}\n"


def _expect(fields: list[str], keyword: str, count: int, source: str) -> list[str]:
    if not fields or fields[0] != keyword or len(fields) < count:
        raise SerializationError(f"Expected a '{keyword}' line, got '{' '.join(fields[:4])}'",
                                 file_path=source)
    return fields[1:]


def loads_model(text: str, source: str = "<string>") -> MlpModel:
    """
    Parse the text format.

    Raises:
        SerializationError: Wrong header, version, checksum or malformed content
    """
    body, separator, checksum_line = text.rstrip("\n").rpartition("\n")
    if not separator:
        raise SerializationError("Model file is truncated", file_path=source)
    body += "\n"

    checksum_fields = checksum_line.split()
    if checksum_fields[:2] != ["checksum", "sha256"] or len(checksum_fields) != 3:
        raise SerializationError("Missing checksum line", file_path=source)
    digest = hashlib.sha256(body.encode(DATASET_ENCODING)).hexdigest()
    if digest != checksum_fields[2]:
        raise SerializationError("Model file checksum mismatch (file is corrupted or edited)",
                                 file_path=source)

    lines = [line.split() for line in body.splitlines()]
    header = lines[0] if lines else []
    if header[:1] != [FORMAT_NAME]:
        raise SerializationError(f"Not a {FORMAT_NAME} file", file_path=source)
    if header[1:] != [str(FORMAT_VERSION)]:
        raise SerializationError(f"Unsupported model format version {' '.join(header[1:])}",
                                 file_path=source)

    try:
        variant = ModelVariant(_expect(lines[1], "variant", 2, source)[0])
        tied = _expect(lines[2], "tied", 2, source)[0] == "1"
        count = int(_expect(lines[3], "layers", 2, source)[0])
        cursor = 4

        layers = []
        for _ in range(count):
            fan_in, fan_out, activation, keep = _expect(lines[cursor], "layer", 5, source)
            layers.append(LayerSpec(fan_in=int(fan_in), fan_out=int(fan_out),
                                    activation=Activation(activation), dropout_keep=float(keep)))
            cursor += 1

        weights = []
        for k, spec in enumerate(layers):
            values = _expect(lines[cursor], "weights", 2, source)
            if int(values[0]) != k:
                raise SerializationError(f"Weights for layer {k} out of order", file_path=source)
            weights.append(np.array([float(v) for v in values[1:]]).reshape(spec.fan_out, spec.fan_in))
            cursor += 1

        biases = []
        for k, spec in enumerate(layers):
            values = _expect(lines[cursor], "biases", 2, source)
            if int(values[0]) != k:
                raise SerializationError(f"Biases for layer {k} out of order", file_path=source)
            biases.append(np.array([float(v) for v in values[1:]]).reshape(spec.fan_out))
            cursor += 1
    except SerializationError:
        raise
    except (IndexError, ValueError) as e:
        raise SerializationError(f"Malformed model file: {e}", file_path=source) from e

    return MlpModel(layers, weights, biases, variant=variant, tied=tied)


def save_model(model: MlpModel, path: Union[str, Path]) -> Path:
    """Write a model file and return its path."""
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(dumps_model(model), encoding=DATASET_ENCODING)
    except OSError as e:
        raise FileOperationError(f"Cannot write model file: {e}", file_path=str(target)) from e
    logger.info("Saved %r to %s", model, target)
    return target


def load_model(path: Union[str, Path]) -> MlpModel:
    """Read a model file written by save_model."""
    source = Path(path)
    try:
        text = source.read_text(encoding=DATASET_ENCODING)
    except OSError as e:
        raise FileOperationError(f"Cannot read model file: {e}", file_path=str(source)) from e
    model = loads_model(text, source=str(source))
    logger.debug("Loaded %r from %s", model, source)
    return model
