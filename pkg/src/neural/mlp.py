"""
METARX Fully-Connected Classifier
Flat-parameter MLP with sigmoid/ReLU hidden layers, softmax output and
exact backpropagation of the mean cross-entropy.

Parameters are one float64 vector laid out layer by layer, each layer
as its row-major d_in x d_out weight matrix followed by its bias.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from channel.models import DimensionMismatchError

PROB_FLOOR = 1e-30
LOG_PROB_FLOOR = float(np.log(PROB_FLOOR))


class NumericalError(FloatingPointError):
    """Raised when a loss or gradient stops being finite, or a strict loss underflows."""


class ClampTally:
    """Running count of label probabilities clamped at PROB_FLOOR."""

    def __init__(self) -> None:
        self.events = 0

    def reset(self) -> int:
        count, self.events = self.events, 0
        return count


clamp_tally = ClampTally()


class Activation(Enum):
    SIGMOID = "sigmoid"
    RELU = "relu"


@dataclass(frozen=True)
class MlpSpec:
    layer_dims: Tuple[int, ...]
    activations: Tuple[Activation, ...] = field(default=())

    def __post_init__(self) -> None:
        if len(self.layer_dims) < 2:
            raise ValueError("an MLP needs at least input and output dims")
        if self.layer_dims[-1] < 2:
            raise ValueError("softmax output needs at least 2 classes")
        if any(d < 1 for d in self.layer_dims):
            raise ValueError(f"layer dims must be positive: {self.layer_dims}")
        if len(self.activations) != len(self.layer_dims) - 2:
            raise ValueError("one activation per hidden layer is required")

    @property
    def d_in(self) -> int:
        return self.layer_dims[0]

    @property
    def d_out(self) -> int:
        return self.layer_dims[-1]

    @property
    def num_layers(self) -> int:
        return len(self.layer_dims) - 1


def classifier_spec(d_in: int, d_out: int, hidden: Sequence[int] = (100, 50)) -> MlpSpec:
    """Sigmoid after the first hidden layer, ReLU after the rest."""
    hidden = tuple(int(h) for h in hidden)
    activations = tuple(Activation.SIGMOID if i == 0 else Activation.RELU for i in range(len(hidden)))
    return MlpSpec((int(d_in), *hidden, int(d_out)), activations)


@dataclass
class LabeledBatch:
    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        if self.inputs.ndim == 1:
            self.inputs = self.inputs[:, None]
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if self.inputs.shape[0] != self.labels.size or self.labels.size < 1:
            raise ValueError(
                f"batch needs matching non-empty inputs/labels, got {self.inputs.shape[0]} / {self.labels.size}"
            )

    def __len__(self) -> int:
        return int(self.labels.size)

    def subset(self, index: np.ndarray) -> "LabeledBatch":
        return LabeledBatch(self.inputs[index], self.labels[index])

    @staticmethod
    def concat(batches: Sequence["LabeledBatch"]) -> "LabeledBatch":
        return LabeledBatch(
            np.concatenate([b.inputs for b in batches], axis=0),
            np.concatenate([b.labels for b in batches]),
        )


def param_count(spec: MlpSpec) -> int:
    dims = spec.layer_dims
    return sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(spec.num_layers))


def unflatten(spec: MlpSpec, params: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(W, b) views into the flat vector."""
    if params.size != param_count(spec):
        raise ValueError(f"parameter vector has {params.size} entries, spec needs {param_count(spec)}")
    layers = []
    offset = 0
    dims = spec.layer_dims
    for i in range(spec.num_layers):
        d_in, d_out = dims[i], dims[i + 1]
        w = params[offset : offset + d_in * d_out].reshape(d_in, d_out)
        offset += d_in * d_out
        b = params[offset : offset + d_out]
        offset += d_out
        layers.append((w, b))
    return layers


def flatten(layers: Sequence[Tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    parts = []
    for w, b in layers:
        parts.append(np.asarray(w, dtype=np.float64).reshape(-1))
        parts.append(np.asarray(b, dtype=np.float64).reshape(-1))
    return np.concatenate(parts)


def mlp_init(spec: MlpSpec, rng: np.random.Generator, scheme: str = "glorot") -> np.ndarray:
    """Glorot-uniform weights, zero biases; `zeros` gives an all-zero vector."""
    if scheme == "zeros":
        return np.zeros(param_count(spec))
    if scheme != "glorot":
        raise ValueError(f"unknown init scheme: {scheme}")
    params = np.zeros(param_count(spec))
    for w, _ in unflatten(spec, params):
        limit = np.sqrt(6.0 / (w.shape[0] + w.shape[1]))
        w[...] = rng.uniform(-limit, limit, size=w.shape)
    return params


def _activate(kind: Activation, z: np.ndarray) -> np.ndarray:
    if kind is Activation.SIGMOID:
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    return np.maximum(z, 0.0)


def _activation_grad(kind: Activation, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if kind is Activation.SIGMOID:
        return a * (1.0 - a)
    return (z > 0.0).astype(np.float64)


def _check_inputs(spec: MlpSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1) if spec.d_in > 1 or x.size == 1 else x.reshape(-1, 1)
    if x.shape[1] != spec.d_in:
        raise DimensionMismatchError(f"input width {x.shape[1]} != spec input dim {spec.d_in}")
    return x


def _forward_logits(spec: MlpSpec, params: np.ndarray, x: np.ndarray):
    layers = unflatten(spec, params)
    pre = []
    post = [x]
    a = x
    for i, (w, b) in enumerate(layers):
        z = a @ w + b
        if i < len(layers) - 1:
            pre.append(z)
            a = _activate(spec.activations[i], z)
            post.append(a)
        else:
            a = z
    return a, pre, post, layers


def forward_batch(spec: MlpSpec, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Row-wise softmax probabilities for an M x d_in input."""
    logits, *_ = _forward_logits(spec, params, _check_inputs(spec, x))
    return softmax(logits, axis=1)


def forward_log_batch(spec: MlpSpec, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    logits, *_ = _forward_logits(spec, params, _check_inputs(spec, x))
    return log_softmax(logits, axis=1)


def relu_pattern(spec: MlpSpec, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Flattened on/off state of every ReLU unit over a batch."""
    _, pre, _, _ = _forward_logits(spec, params, _check_inputs(spec, x))
    parts = [z.reshape(-1) > 0.0 for z, kind in zip(pre, spec.activations) if kind is Activation.RELU]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=bool)


def forward(spec: MlpSpec, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Probability vector for a single input of length d_in."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return forward_batch(spec, params, x)[0]


def loss_and_grad(
    spec: MlpSpec, params: np.ndarray, batch: LabeledBatch, strict: bool = False
) -> Tuple[float, np.ndarray]:
    """
    Mean cross-entropy and its exact gradient.
    Label probabilities below PROB_FLOOR are clamped and counted in `clamp_tally`;
    with `strict` they raise NumericalError instead.
    """
    x = _check_inputs(spec, batch.inputs)
    if np.any(batch.labels < 0) or np.any(batch.labels >= spec.d_out):
        raise ValueError(f"labels must lie in [0, {spec.d_out})")
    logits, pre, post, layers = _forward_logits(spec, params, x)
    m = x.shape[0]
    rows = np.arange(m)

    log_probs = log_softmax(logits, axis=1)
    picked = log_probs[rows, batch.labels]
    clamped = int(np.count_nonzero(picked < LOG_PROB_FLOOR))
    if clamped:
        if strict:
            raise NumericalError(f"{clamped} label probabilities underflowed below {PROB_FLOOR:g}")
        clamp_tally.events += clamped
        picked = np.maximum(picked, LOG_PROB_FLOOR)
    loss = float(-picked.mean())

    delta = np.exp(log_probs)
    delta[rows, batch.labels] -= 1.0
    delta /= m

    grads: List[Tuple[np.ndarray, np.ndarray]] = [None] * len(layers)  # type: ignore[list-item]
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        grads[i] = (post[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ w.T) * _activation_grad(spec.activations[i - 1], pre[i - 1], post[i])

    grad = flatten(grads)
    if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
        raise NumericalError("cross-entropy loss or gradient is not finite")
    return loss, grad
