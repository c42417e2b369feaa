"""scikit-learn compatible wrappers around the transforms and the classifier.

``FastHadamardTransformer`` is a stateless feature transformer;
``HadamardNetClassifier`` trains the small convolutional network (baseline
or transform-domain variant) on grayscale images with the usual
``fit``/``predict`` surface so it composes with pipelines, ``clone`` and
model selection.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import ht_layer
from .hadamard import SYMMETRIC, fwht_along_axis, _forward_scale, _inverse_scale
from .network import ModelSpec, softmax_cross_entropy
from .optim import Adadelta
from .quantum import SAMPLED, MeasurementPlan
from .validation import check_convention, derive_seed, is_power_of_two

__all__ = ["FastHadamardTransformer", "HadamardNetClassifier"]


def _next_pow2(n: int) -> int:
    m = 1
    while m < n:
        m *= 2
    return m


class FastHadamardTransformer(TransformerMixin, BaseEstimator):
    """Apply the fast Hadamard transform to every sample (row) of X.

    Parameters
    ----------
    convention : "symmetric" or "folded-inverse" normalization.
    pad : if True, zero-pad rows to the next power-of-two length; otherwise
        a non power-of-two feature count is an error.
    """

    def __init__(self, convention: str = SYMMETRIC, pad: bool = False):
        self.convention = convention
        self.pad = pad

    def fit(self, X, y=None):
        check_convention(self.convention)
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError(f"expected 2D data, got shape {X.shape}")
        self.n_features_in_ = X.shape[1]
        return self

    def _prep(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError(f"expected 2D data, got shape {X.shape}")
        if not is_power_of_two(X.shape[1]):
            if not self.pad:
                raise ValueError(
                    f"{X.shape[1]} features is not a power of two; set pad=True"
                )
            target = _next_pow2(X.shape[1])
            X = np.pad(X, ((0, 0), (0, target - X.shape[1])))
        return X

    def transform(self, X):
        X = self._prep(X)
        out = fwht_along_axis(X, axis=1)
        return out * _forward_scale(X.shape[1], self.convention)

    def inverse_transform(self, X):
        X = self._prep(X)
        out = fwht_along_axis(X, axis=1)
        return out * _inverse_scale(X.shape[1], self.convention)


class HadamardNetClassifier(ClassifierMixin, BaseEstimator):
    """Small image classifier with an optional transform-domain second layer.

    Accepts grayscale images as (n, d*d), (n, h, w) or (n, 1, h, w) arrays.
    Pixels are scaled to [0, 1] if they look like byte data, images are
    zero-padded to a power-of-two side, and intensities are standardized
    with statistics learned from the training data.
    """

    def __init__(self, architecture: str = "toy-ht-cnn", paths: int = 3,
                 epochs: int = 14, batch_size: int = 64, learning_rate: float = 1.0,
                 lr_decay: float = 0.7, dropout: float = 0.2, rho: float = 0.9,
                 eps: float = 1e-6, channels: int = 32, dense_units: int = 128,
                 pool: str = "max", ht_backend: str = "classical",
                 shots: int = 1_000_000, random_state: int = 0, verbose: int = 0):
        self.architecture = architecture
        self.paths = paths
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.dropout = dropout
        self.rho = rho
        self.eps = eps
        self.channels = channels
        self.dense_units = dense_units
        self.pool = pool
        self.ht_backend = ht_backend
        self.shots = shots
        self.random_state = random_state
        self.verbose = verbose

    def _as_images(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float32)
        if X.ndim == 2:
            side = int(round(np.sqrt(X.shape[1])))
            if side * side != X.shape[1]:
                raise ValueError(
                    f"cannot reshape {X.shape[1]} features into a square image"
                )
            X = X.reshape(-1, 1, side, side)
        elif X.ndim == 3:
            X = X[:, None, :, :]
        elif X.ndim != 4:
            raise ValueError(f"expected 2D, 3D or 4D input, got shape {X.shape}")
        if X.shape[1] != 1:
            raise ValueError("only single-channel images are supported")
        return X

    def _preprocess(self, X, fit: bool) -> np.ndarray:
        X = self._as_images(X)
        if fit:
            self.pixel_scale_ = 255.0 if float(X.max()) > 1.5 else 1.0
        X = X / self.pixel_scale_
        side = _next_pow2(max(X.shape[2], X.shape[3]))
        if fit:
            self.image_size_ = side
        elif side > self.image_size_:
            raise ValueError(
                f"input images {X.shape[2:]} exceed the fitted size {self.image_size_}"
            )
        side = self.image_size_
        ph, pw = side - X.shape[2], side - X.shape[3]
        X = np.pad(X, ((0, 0), (0, 0), (ph // 2, ph - ph // 2), (pw // 2, pw - pw // 2)))
        if fit:
            self.pixel_mean_ = float(X.mean())
            self.pixel_std_ = float(X.std()) or 1.0
        return (X - self.pixel_mean_) / self.pixel_std_

    def fit(self, X, y):
        y = np.asarray(y)
        self.classes_, labels = np.unique(y, return_inverse=True)
        images = self._preprocess(X, fit=True)
        self.n_features_in_ = int(np.prod(np.asarray(X).shape[1:]))

        spec = ModelSpec(architecture=self.architecture, paths=self.paths,
                         image_size=self.image_size_, channels=self.channels,
                         dense_units=self.dense_units, classes=len(self.classes_),
                         pool=self.pool, dropout=self.dropout)
        self.model_spec_ = spec
        net = spec.build(seed=derive_seed(self.random_state, 1))
        optimizer = Adadelta(net.params(), rho=self.rho, eps=self.eps)
        shuffle = np.random.Generator(np.random.Philox(derive_seed(self.random_state, 2)))
        dropout_rng = np.random.Generator(np.random.Philox(derive_seed(self.random_state, 4)))

        lr = self.learning_rate
        n = images.shape[0]
        self.loss_curve_ = []
        for epoch in range(self.epochs):
            order = shuffle.permutation(n)
            losses = []
            for start in range(0, n, self.batch_size):
                idx = order[start:start + self.batch_size]
                net.zero_grads()
                logits = net.forward(images[idx], training=True, rng=dropout_rng)
                loss, grad = softmax_cross_entropy(logits, labels[idx])
                if not np.isfinite(loss):
                    raise RuntimeError(f"training diverged at epoch {epoch + 1}")
                net.backward(grad.astype(logits.dtype))
                optimizer.step(lr)
                losses.append(loss)
            self.loss_curve_.append(float(np.mean(losses)))
            if self.verbose:
                print(f"epoch {epoch + 1}: loss {self.loss_curve_[-1]:.4f}")
            lr *= self.lr_decay
        self.network_ = net
        return self

    def _check_fitted(self):
        if not hasattr(self, "network_"):
            raise NotFittedError("this classifier has not been fitted yet")

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        images = self._preprocess(X, fit=False)
        plan = None
        if self.ht_backend == ht_layer.QUANTUM_SHOTS:
            plan = MeasurementPlan(SAMPLED, shots=self.shots,
                                   seed=derive_seed(self.random_state, 3))
        self.network_.set_ht_backend(self.ht_backend, plan)
        logits = []
        for start in range(0, images.shape[0], 256):
            logits.append(self.network_.forward(images[start:start + 256],
                                                training=False))
        self.network_.set_ht_backend(ht_layer.CLASSICAL, None)
        return np.concatenate(logits)

    def predict_proba(self, X) -> np.ndarray:
        logits = self.decision_function(X)
        shifted = logits - logits.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        return exp / exp.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        return self.classes_[self.decision_function(X).argmax(axis=1)]
