"""Classifier model: spec, construction, forward pass, loss and gradients.

The cnn flavour follows the decreasing-kernel recipe: kernels L, L-1, ..., 2
with 64 filters each on the (2L-1)^2 single-channel syndrome image, one dense
512 layer, softmax over the decoder labels. The mlp flavour consumes the raw
length-m syndrome vector through 4x512 + 256 hidden layers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from decodelab.nn.layers import Conv2D, Dense, Flatten, ReLU, softmax

DEFAULT_CONV_FILTERS = 64
DEFAULT_CNN_DENSE = (512,)
DEFAULT_MLP_DENSE = (512, 512, 512, 512, 256)


@dataclass(frozen=True)
class ModelSpec:
    model_type: str                       # "cnn" | "mlp"
    input_grid_side: int                  # 2L - 1
    conv_layers: tuple[tuple[int, int], ...]  # (kernel, filters) per layer
    dense_layers: tuple[int, ...]
    output_classes: int

    def __post_init__(self):
        if self.model_type not in ("cnn", "mlp"):
            raise ValueError(f"model_type must be cnn or mlp, got {self.model_type!r}")
        if self.model_type == "mlp" and self.conv_layers:
            raise ValueError("mlp spec cannot have conv layers")
        if self.input_grid_side < 3 or self.input_grid_side % 2 == 0:
            raise ValueError("input_grid_side must be an odd integer >= 3")
        if self.output_classes < 2:
            raise ValueError("need at least two output classes")
        for k, f in self.conv_layers:
            if k < 1 or k > self.input_grid_side or f < 1:
                raise ValueError(f"bad conv layer ({k}, {f})")

    @property
    def distance(self) -> int:
        return (self.input_grid_side + 1) // 2

    @property
    def syndrome_length(self) -> int:
        return (self.input_grid_side ** 2 - 1) // 2

    @property
    def input_shape(self) -> tuple[int, ...]:
        g = self.input_grid_side
        return (g, g, 1) if self.model_type == "cnn" else (self.syndrome_length,)

    @classmethod
    def cnn_default(cls, distance: int, output_classes: int = 2,
                    filters: int = DEFAULT_CONV_FILTERS) -> "ModelSpec":
        convs = tuple((k, filters) for k in range(distance, 1, -1))
        return cls("cnn", 2 * distance - 1, convs, DEFAULT_CNN_DENSE, output_classes)

    @classmethod
    def mlp_default(cls, distance: int, output_classes: int = 2) -> "ModelSpec":
        return cls("mlp", 2 * distance - 1, (), DEFAULT_MLP_DENSE, output_classes)


class Model:
    """Layer stack ending in softmax; parameters live in the layers."""

    def __init__(self, spec: ModelSpec, layers, dtype):
        self.spec = spec
        self.layers = layers
        self.dtype = dtype

    @property
    def params(self):
        return [p for layer in self.layers for p in layer.params]

    @property
    def grads(self):
        return [g for layer in self.layers for g in layer.grads]

    def logits(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.logits(np.asarray(x, dtype=self.dtype)))

    def _as_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        want = self.spec.input_shape
        if x.shape == want:
            return x[None, ...]
        if x.shape[1:] == want:
            return x
        raise ValueError(f"input shape {x.shape} incompatible with {want}")


def build_model(spec: ModelSpec, seed: int = 0, dtype=np.float32) -> Model:
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0x6E6E], dtype=np.uint64)))
    layers = []
    if spec.model_type == "cnn":
        g = spec.input_grid_side
        in_ch = 1
        for k, f in spec.conv_layers:
            layers.append(Conv2D(k, in_ch, f, rng, dtype))
            layers.append(ReLU())
            in_ch = f
        layers.append(Flatten())
        width = g * g * in_ch
    else:
        width = spec.syndrome_length
    for h in spec.dense_layers:
        layers.append(Dense(width, h, rng, dtype))
        layers.append(ReLU())
        width = h
    layers.append(Dense(width, spec.output_classes, rng, dtype))
    return Model(spec, layers, dtype)


def forward(model: Model, x: np.ndarray) -> np.ndarray:
    """Probability vector over the k decoder labels; accepts one input or a batch."""
    single = np.asarray(x).shape == model.spec.input_shape
    probs = model.forward_batch(model._as_batch(x))
    return probs[0] if single else probs


def predict_label(model: Model, x: np.ndarray) -> int:
    """argmax of forward(); ties resolve to the lower (preferred) label."""
    p = forward(model, x)
    return int(np.argmax(p))


def predict_labels(model: Model, batch: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Vectorised argmax labels for a batch of inputs."""
    out = np.empty(len(batch), dtype=np.int64)
    for lo in range(0, len(batch), chunk):
        probs = model.forward_batch(batch[lo:lo + chunk])
        out[lo:lo + chunk] = np.argmax(probs, axis=1)
    return out


def _loss_backward(model: Model, inputs: np.ndarray, labels: np.ndarray,
                   label_weights: np.ndarray | None):
    """One forward + backward pass; returns (loss, probs)."""
    x = np.asarray(inputs, dtype=model.dtype)
    y = np.asarray(labels)
    k = model.spec.output_classes
    if y.min() < 0 or y.max() >= k:
        raise ValueError("label out of range")
    logits = model.logits(x)
    probs = softmax(logits)
    n = len(y)
    if label_weights is None:
        label_weights = np.ones(k, dtype=model.dtype)
    wrow = np.asarray(label_weights, dtype=model.dtype)[y]
    wsum = wrow.sum()
    eps = np.finfo(model.dtype).tiny
    loss = float(-(wrow * np.log(probs[np.arange(n), y] + eps)).sum() / wsum)

    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits *= (wrow / wsum)[:, None]
    g = dlogits.astype(model.dtype)
    for layer in reversed(model.layers):
        g = layer.backward(g)
    return loss, probs


def loss_and_gradients(model: Model, inputs: np.ndarray, labels: np.ndarray,
                       label_weights: np.ndarray | None = None):
    """Weighted mean categorical cross-entropy and backprop gradients.

    labels are integer class ids; label_weights (per class) default to ones.
    Returns (loss, grads) with grads aliasing model.grads order.
    """
    loss, _ = _loss_backward(model, inputs, labels, label_weights)
    return loss, model.grads
