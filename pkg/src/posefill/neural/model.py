"""Dense feed-forward networks with manual forward/backward and SGD.

Both the generator and the discriminator share one architecture: for a part
of length l, the input is the 2l data vector concatenated with a 2l
conditioning vector (mask or hint), eight ReLU hidden layers of widths
(4l, 8l, 16l, 2l, 4l, 8l, 16l, 2l), an optional skip adding the layer-4
output to the layer-8 output, and a sigmoid output layer of width 2l.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import (
    CacheMismatchError,
    CheckpointFormatError,
    CheckpointShapeError,
    CheckpointVersionError,
    ConfigError,
    NumericError,
    ShapeError,
)
from ..rng import RngStream
from . import backend

PART_LENGTHS = {5: "head", 13: "body"}
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class MlpArch:
    """Architecture descriptor: part length (5 or 13) and the residual flag."""

    part_len: int
    residual: bool = False

    def __post_init__(self):
        if self.part_len not in PART_LENGTHS:
            raise ConfigError(f"part length must be one of {sorted(PART_LENGTHS)}, got {self.part_len}")

    @property
    def part_name(self) -> str:
        return PART_LENGTHS[self.part_len]

    @property
    def input_width(self) -> int:
        return 4 * self.part_len

    @property
    def output_width(self) -> int:
        return 2 * self.part_len

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        l = self.part_len
        return (4 * l, 8 * l, 16 * l, 2 * l, 4 * l, 8 * l, 16 * l, 2 * l)

    def layer_dims(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) of every layer including the output layer."""
        widths = (self.input_width,) + self.hidden_widths + (self.output_width,)
        return [(widths[i], widths[i + 1]) for i in range(len(widths) - 1)]


class MlpParams:
    """Weights and biases of one network; mutated in place by sgd_step.

    ``version`` increments on every update so stale forward caches are
    detected in :func:`backward`.
    """

    def __init__(self, arch: MlpArch, weights, biases):
        dims = arch.layer_dims()
        if len(weights) != len(dims) or len(biases) != len(dims):
            raise ShapeError(f"expected {len(dims)} layers, got {len(weights)} weights / {len(biases)} biases")
        self.arch = arch
        self.weights = []
        self.biases = []
        for (fan_in, fan_out), w, b in zip(dims, weights, biases):
            w = np.ascontiguousarray(np.asarray(w, dtype=np.float64))
            b = np.ascontiguousarray(np.asarray(b, dtype=np.float64))
            if w.shape != (fan_out, fan_in):
                raise ShapeError(f"weight shape {w.shape} does not match ({fan_out}, {fan_in})")
            if b.shape != (fan_out,):
                raise ShapeError(f"bias shape {b.shape} does not match ({fan_out},)")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise NumericError("parameters must be finite")
            self.weights.append(w)
            self.biases.append(b)
        self.version = 0

    @property
    def n_parameters(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def copy(self) -> "MlpParams":
        return MlpParams(self.arch, [w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass
class MlpGrads:
    """Gradients with the same layer structure as MlpParams."""

    weights: list
    biases: list


@dataclass
class ForwardCache:
    """Per-layer activations retained for the backward pass."""

    params_id: int
    params_version: int
    activations: list
    skip: np.ndarray
    output: np.ndarray
    batched: bool


def init_mlp(arch: MlpArch, rng: RngStream) -> MlpParams:
    """Uniform Glorot weights, zero biases; deterministic for a given stream."""
    weights = []
    biases = []
    for fan_in, fan_out in arch.layer_dims():
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append((2.0 * rng.uniform((fan_out, fan_in)) - 1.0) * bound)
        biases.append(np.zeros(fan_out))
    return MlpParams(arch, weights, biases)


def _as_batch(params: MlpParams, x):
    x = np.asarray(x, dtype=np.float64)
    batched = x.ndim == 2
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.arch.input_width:
        raise ShapeError(f"input width must be {params.arch.input_width}, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise NumericError("network input must be finite")
    return np.ascontiguousarray(x), batched


def forward(params: MlpParams, x) -> tuple[np.ndarray, ForwardCache]:
    """Evaluate the network on a single 4l vector or an (n, 4l) batch.

    Output values are strictly inside (0, 1) for finite inputs.
    """
    xb, batched = _as_batch(params, x)
    y, acts, skip = backend.forward_batch(params.weights, params.biases, xb, params.arch.residual)
    cache = ForwardCache(
        params_id=id(params),
        params_version=params.version,
        activations=acts,
        skip=skip,
        output=y,
        batched=batched,
    )
    return (y if batched else y[0]), cache


def backward(params: MlpParams, cache: ForwardCache, grad_output) -> tuple[MlpGrads, np.ndarray]:
    """Reverse-mode gradients of :func:`forward` for a given output gradient.

    The cache must come from a forward call on this exact parameter state.
    Returns (parameter gradients, input gradient).
    """
    if cache.params_id != id(params) or cache.params_version != params.version:
        raise CacheMismatchError("cache does not match the current parameters")
    g = np.asarray(grad_output, dtype=np.float64)
    if not cache.batched and g.ndim == 1:
        g = g[None, :]
    if g.shape != cache.output.shape:
        raise ShapeError(f"grad_output shape {g.shape} does not match output {cache.output.shape}")
    g = np.ascontiguousarray(g)
    dws, dbs, gx = backend.backward_batch(
        params.weights, cache.activations, cache.skip, cache.output, g, params.arch.residual
    )
    return MlpGrads(weights=dws, biases=dbs), (gx if cache.batched else gx[0])


def input_gradient(params: MlpParams, cache: ForwardCache, grad_output) -> np.ndarray:
    """Gradient w.r.t. the network input only (parameter grads skipped)."""
    if cache.params_id != id(params) or cache.params_version != params.version:
        raise CacheMismatchError("cache does not match the current parameters")
    g = np.ascontiguousarray(np.asarray(grad_output, dtype=np.float64))
    _, _, gx = backend.backward_batch(
        params.weights,
        cache.activations,
        cache.skip,
        cache.output,
        g,
        params.arch.residual,
        with_param_grads=False,
    )
    return gx if cache.batched else gx[0]


def sgd_step(params: MlpParams, grads: MlpGrads, lr: float) -> MlpParams:
    """In-place plain-SGD update: p <- p - lr * g. Returns the same object."""
    if lr <= 0 or not np.isfinite(lr):
        raise ConfigError(f"learning rate must be positive and finite, got {lr}")
    if len(grads.weights) != len(params.weights):
        raise ShapeError("gradient layer count does not match parameters")
    for w, gw in zip(params.weights, grads.weights):
        if w.shape != gw.shape:
            raise ShapeError(f"weight grad shape {gw.shape} does not match {w.shape}")
    for b, gb in zip(params.biases, grads.biases):
        if b.shape != gb.shape:
            raise ShapeError(f"bias grad shape {gb.shape} does not match {b.shape}")
    for w, gw in zip(params.weights, grads.weights):
        w -= lr * gw
    for b, gb in zip(params.biases, grads.biases):
        b -= lr * gb
    params.version += 1
    return params


def l1_penalty(params: MlpParams) -> float:
    """Sum of absolute weight values; biases excluded."""
    return float(sum(np.abs(w).sum() for w in params.weights))


def save_checkpoint(params: MlpParams, meta, path) -> None:
    """Write the parameters to a self-describing JSON document.

    Decimal rendering uses Python's shortest round-trip float repr, so a
    save/load cycle reproduces every 64-bit value exactly.
    """
    arch = params.arch
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "part": arch.part_name,
        "part_len": arch.part_len,
        "input_width": arch.input_width,
        "hidden_widths": list(arch.hidden_widths),
        "output_width": arch.output_width,
        "residual": arch.residual,
        "activations": ["relu"] * len(arch.hidden_widths) + ["sigmoid"],
        "layers": [
            {
                "shape": [int(w.shape[0]), int(w.shape[1])],
                "weights": w.ravel().tolist(),  # row-major
                "biases": b.tolist(),
            }
            for w, b in zip(params.weights, params.biases)
        ],
        "meta": meta,
    }
    Path(path).write_text(json.dumps(doc, allow_nan=False), encoding="utf-8")


def load_checkpoint(path) -> tuple[MlpParams, dict | None]:
    """Read a checkpoint, validating version, declared widths, and array shapes."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointFormatError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CheckpointFormatError(f"{path} is not a checkpoint document")
    if doc["format_version"] != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint version {doc['format_version']!r} (expected {CHECKPOINT_VERSION})"
        )
    try:
        arch = MlpArch(part_len=int(doc["part_len"]), residual=bool(doc["residual"]))
        layers = doc["layers"]
        declared_hidden = list(doc["hidden_widths"])
        declared_part = doc["part"]
        declared_acts = list(doc["activations"])
    except (KeyError, TypeError, ConfigError) as exc:
        raise CheckpointFormatError(f"malformed checkpoint {path}: {exc}") from exc
    if declared_part != arch.part_name:
        raise CheckpointShapeError(f"part {declared_part!r} does not match part_len {arch.part_len}")
    if declared_hidden != list(arch.hidden_widths):
        raise CheckpointShapeError(f"hidden widths {declared_hidden} do not match part_len {arch.part_len}")
    if declared_acts != ["relu"] * len(arch.hidden_widths) + ["sigmoid"]:
        raise CheckpointShapeError(f"unexpected activation layout {declared_acts}")
    dims = arch.layer_dims()
    if not isinstance(layers, list) or len(layers) != len(dims):
        raise CheckpointShapeError(f"expected {len(dims)} layers, found {len(layers) if isinstance(layers, list) else 'none'}")
    weights = []
    biases = []
    for (fan_in, fan_out), layer in zip(dims, layers):
        try:
            shape = tuple(layer["shape"])
            flat = np.asarray(layer["weights"], dtype=np.float64)
            b = np.asarray(layer["biases"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointFormatError(f"malformed layer in {path}: {exc}") from exc
        if shape != (fan_out, fan_in) or flat.size != fan_out * fan_in or b.shape != (fan_out,):
            raise CheckpointShapeError(
                f"layer arrays do not match declared architecture ({fan_out}, {fan_in})"
            )
        weights.append(flat.reshape(fan_out, fan_in))
        biases.append(b)
    try:
        params = MlpParams(arch, weights, biases)
    except (ShapeError, NumericError) as exc:
        raise CheckpointShapeError(str(exc)) from exc
    return params, doc.get("meta")
