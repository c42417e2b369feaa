"""Minimal from-scratch network stack: layers, loss, and the two toy models.

Layers follow a forward/backward protocol with explicit parameter objects so
the optimizer can update weights in place. Everything is plain numpy;
float32 is used for training and float64 for gradient verification.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import ht_layer
from .costs import CostReport, TOY_CNN, TOY_HT_CNN, toy_model_cost
from .ht_layer import HTPerceptronParams, MeasurementPlan
from .validation import check_power_of_two, derive_seed

__all__ = [
    "Param",
    "Conv2D",
    "ReLU",
    "MaxPool2x2",
    "AvgPool2x2",
    "Dropout",
    "Flatten",
    "Dense",
    "HadamardPerceptron2D",
    "softmax_cross_entropy",
    "Network",
    "ModelSpec",
]


@dataclass
class Param:
    """A trainable array plus its gradient accumulator."""

    name: str
    value: np.ndarray
    grad: np.ndarray = field(init=False)
    nonneg: bool = False

    def __post_init__(self):
        self.grad = np.zeros_like(self.value)


class Layer:
    name = "layer"

    def params(self) -> list[Param]:
        return []

    def forward(self, x: np.ndarray, training: bool = False,
                rng: np.random.Generator | None = None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv2D(Layer):
    """K x K cross-correlation, stride 1, same zero padding, with bias."""

    def __init__(self, c_in: int, c_out: int, kernel_size: int, rng: np.random.Generator,
                 dtype=np.float32, name: str = "conv"):
        if kernel_size % 2 != 1:
            raise ValueError("same padding requires an odd kernel size")
        self.name = name
        self.c_in, self.c_out, self.k = c_in, c_out, kernel_size
        fan_in = c_in * kernel_size * kernel_size
        bound = np.sqrt(1.0 / fan_in)
        self.weight = Param(f"{name}.weight",
                            rng.uniform(-bound, bound,
                                        (c_out, c_in, kernel_size, kernel_size)).astype(dtype))
        self.bias = Param(f"{name}.bias", rng.uniform(-bound, bound, c_out).astype(dtype))
        self._cols = None
        self._in_shape = None

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x, training=False, rng=None):
        b, c, h, w = x.shape
        if c != self.c_in:
            raise ValueError(f"{self.name}: expected {self.c_in} channels, got {c}")
        k, pad = self.k, self.k // 2
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
        win = sliding_window_view(xp, (k, k), axis=(2, 3))      # (B, C, H, W, k, k)
        cols = np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5)).reshape(
            b * h * w, c * k * k)
        wmat = self.weight.value.reshape(self.c_out, c * k * k)
        out = cols @ wmat.T
        out += self.bias.value
        self._cols, self._in_shape = cols, x.shape
        return out.reshape(b, h, w, self.c_out).transpose(0, 3, 1, 2)

    def backward(self, grad):
        b, c, h, w = self._in_shape
        k, pad = self.k, self.k // 2
        go = np.ascontiguousarray(grad.transpose(0, 2, 3, 1)).reshape(b * h * w, self.c_out)
        self.weight.grad += (go.T @ self._cols).reshape(self.weight.value.shape)
        self.bias.grad += go.sum(axis=0)
        gcols = (go @ self.weight.value.reshape(self.c_out, c * k * k)).reshape(
            b, h, w, c, k, k).transpose(0, 3, 1, 2, 4, 5)
        gxp = np.zeros((b, c, h + 2 * pad, w + 2 * pad), dtype=grad.dtype)
        for i in range(k):
            for j in range(k):
                gxp[:, :, i:i + h, j:j + w] += gcols[:, :, :, :, i, j]
        self._cols = None
        return gxp[:, :, pad:pad + h, pad:pad + w]


class ReLU(Layer):
    name = "relu"

    def forward(self, x, training=False, rng=None):
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad):
        return grad * self._mask


class MaxPool2x2(Layer):
    """2x2 max pooling, stride 2; ties route the gradient to the first maximum."""

    name = "maxpool"

    def forward(self, x, training=False, rng=None):
        b, c, h, w = x.shape
        v = x.reshape(b, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(
            b, c, h // 2, w // 2, 4)
        self._idx = v.argmax(axis=-1)
        self._in_shape = x.shape
        return np.take_along_axis(v, self._idx[..., None], axis=-1)[..., 0]

    def backward(self, grad):
        b, c, h, w = self._in_shape
        gv = np.zeros((b, c, h // 2, w // 2, 4), dtype=grad.dtype)
        np.put_along_axis(gv, self._idx[..., None], grad[..., None], axis=-1)
        return gv.reshape(b, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(
            b, c, h, w)


class AvgPool2x2(Layer):
    name = "avgpool"

    def forward(self, x, training=False, rng=None):
        b, c, h, w = x.shape
        self._in_shape = x.shape
        return x.reshape(b, c, h // 2, 2, w // 2, 2).mean(axis=(3, 5))

    def backward(self, grad):
        b, c, h, w = self._in_shape
        g = np.broadcast_to(grad[:, :, :, None, :, None] * np.asarray(0.25, grad.dtype),
                            (b, c, h // 2, 2, w // 2, 2))
        return g.reshape(b, c, h, w)


class Dropout(Layer):
    """Inverted dropout: active in training only, scaled by 1/(1-p)."""

    def __init__(self, p: float, name: str = "dropout"):
        if not 0.0 <= p < 1.0:
            raise ValueError(f"dropout probability must be in [0, 1), got {p}")
        self.name = name
        self.p = p

    def forward(self, x, training=False, rng=None):
        if not training or self.p == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("training-mode dropout needs a random generator")
        self._mask = (rng.random(x.shape) >= self.p).astype(x.dtype) / (1.0 - self.p)
        return x * self._mask

    def backward(self, grad):
        if self._mask is None:
            return grad
        return grad * self._mask


class Flatten(Layer):
    name = "flatten"

    def forward(self, x, training=False, rng=None):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._in_shape)


class Dense(Layer):
    def __init__(self, fan_in: int, fan_out: int, rng: np.random.Generator,
                 dtype=np.float32, name: str = "dense"):
        self.name = name
        bound = np.sqrt(1.0 / fan_in)
        self.weight = Param(f"{name}.weight",
                            rng.uniform(-bound, bound, (fan_out, fan_in)).astype(dtype))
        self.bias = Param(f"{name}.bias", rng.uniform(-bound, bound, fan_out).astype(dtype))

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x, training=False, rng=None):
        self._x = x
        return x @ self.weight.value.T + self.bias.value

    def backward(self, grad):
        self.weight.grad += grad.T @ self._x
        self.bias.grad += grad.sum(axis=0)
        self._x = None
        return grad @ self.weight.value


class HadamardPerceptron2D(Layer):
    """Transform-domain perceptron layer wrapping the functional kernel."""

    def __init__(self, paths: int, height: int, width: int, c_in: int, c_out: int,
                 rng: np.random.Generator, dtype=np.float32, name: str = "htp"):
        self.name = name
        p = ht_layer.init_params(paths, height, width, c_in, c_out, rng, dtype=dtype)
        self.scales = Param(f"{name}.scales", p.scales)
        self.thresholds = Param(f"{name}.thresholds", p.thresholds, nonneg=True)
        self.kernels = Param(f"{name}.kernels", p.kernels)
        self.backend = ht_layer.CLASSICAL
        self.plan: MeasurementPlan | None = None

    def params(self):
        return [self.scales, self.thresholds, self.kernels]

    @property
    def layer_params(self) -> HTPerceptronParams:
        return HTPerceptronParams(self.scales.value, self.thresholds.value,
                                  self.kernels.value)

    def forward(self, x, training=False, rng=None):
        backend = ht_layer.CLASSICAL if training else self.backend
        y, self._cache = ht_layer.ht_perceptron_forward(
            x, self.layer_params, backend=backend, plan=self.plan)
        return y.astype(x.dtype, copy=False)

    def backward(self, grad):
        gx, gs, gt, gk = ht_layer.ht_perceptron_backward(self._cache, grad)
        self.scales.grad += gs
        self.thresholds.grad += gt
        self.kernels.grad += gk
        self._cache = None
        return gx.astype(grad.dtype, copy=False)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy over the batch plus the gradient w.r.t. the logits."""
    labels = np.asarray(labels)
    n, k = logits.shape
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels out of range for {k} classes")
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    nll = -(shifted[np.arange(n), labels] - np.log(exp.sum(axis=1)))
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    return float(nll.mean()), grad / n


class Network:
    """An ordered stack of layers with a shared parameter list."""

    def __init__(self, layers: list[Layer], spec: "ModelSpec | None" = None):
        self.layers = layers
        self.spec = spec

    def params(self) -> list[Param]:
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def zero_grads(self):
        for p in self.params():
            p.grad[...] = 0.0

    def forward(self, x, training=False, rng=None):
        for layer in self.layers:
            x = layer.forward(x, training=training, rng=rng)
        return x

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def set_ht_backend(self, backend: str, plan: MeasurementPlan | None = None):
        for layer in self.layers:
            if isinstance(layer, HadamardPerceptron2D):
                layer.backend = backend
                layer.plan = plan

    def state_dict(self) -> dict[str, np.ndarray]:
        return {p.name: p.value for p in self.params()}

    def load_state_dict(self, state: dict[str, np.ndarray]):
        own = {p.name: p for p in self.params()}
        missing = sorted(set(own) - set(state))
        extra = sorted(set(state) - set(own))
        if missing or extra:
            raise ValueError(
                f"checkpoint does not match the model: missing {missing}, unexpected {extra}"
            )
        for name, p in own.items():
            arr = np.asarray(state[name])
            if arr.shape != p.value.shape:
                raise ValueError(
                    f"shape mismatch for {name}: checkpoint {arr.shape}, model {p.value.shape}"
                )
            p.value[...] = arr.astype(p.value.dtype)


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of the two toy architectures.

    The transform-domain variant differs from the baseline only in the
    second convolution slot.
    """

    architecture: str = TOY_HT_CNN
    paths: int = 3
    in_channels: int = 1
    image_size: int = 32
    channels: int = 32
    dense_units: int = 128
    classes: int = 10
    pool: str = "max"
    dropout: float = 0.2
    dtype: str = "float32"

    def __post_init__(self):
        if self.architecture not in (TOY_CNN, TOY_HT_CNN):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.pool not in ("max", "average"):
            raise ValueError(f"unknown pooling {self.pool!r}")
        check_power_of_two(self.image_size, "image size")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(**d)

    def cost_report(self) -> CostReport:
        return toy_model_cost(self.architecture, paths=self.paths,
                              image_size=self.image_size, channels=self.channels,
                              dense_units=self.dense_units, classes=self.classes)

    def build(self, seed: int = 0) -> Network:
        dtype = np.dtype(self.dtype)
        rng = np.random.Generator(np.random.Philox(derive_seed(seed, 0)))
        n = self.image_size
        pool_cls = MaxPool2x2 if self.pool == "max" else AvgPool2x2
        layers: list[Layer] = [
            Conv2D(self.in_channels, self.channels, 3, rng, dtype, name="conv1"),
            ReLU(),
        ]
        if self.architecture == TOY_CNN:
            layers += [Conv2D(self.channels, self.channels, 3, rng, dtype, name="conv2"),
                       ReLU()]
        else:
            layers += [HadamardPerceptron2D(self.paths, n, n, self.channels,
                                            self.channels, rng, dtype, name="htp")]
        flat = self.channels * (n // 2) * (n // 2)
        layers += [
            Dropout(self.dropout, name="dropout1"),
            pool_cls(),
            Flatten(),
            Dense(flat, self.dense_units, rng, dtype, name="dense1"),
            ReLU(),
            Dropout(self.dropout, name="dropout2"),
            Dense(self.dense_units, self.classes, rng, dtype, name="dense2"),
        ]
        return Network(layers, spec=self)
