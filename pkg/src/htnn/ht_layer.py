"""Hadamard-domain perceptron layer: forward, backward, init, serialization dtypes.

The layer transforms the spatial dims of a (B, C, H, W) tensor into the
Hadamard domain, runs P parallel paths of (element-wise scaling ->
channel-wise 1x1 mixing -> trainable soft-thresholding), sums the paths,
and transforms back. The folded normalization convention is used: the
forward transform is unnormalized and the inverse carries one 1/(H*W), so
no square roots appear in the hot path (the scaling stage absorbs any
constant).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hadamard import fwht_inplace
from .quantum import EXACT, MeasurementPlan, hybrid_ht2d
from .validation import check_power_of_two, check_tensor4, derive_seed

__all__ = [
    "CLASSICAL",
    "QUANTUM_EXACT",
    "QUANTUM_SHOTS",
    "HTPerceptronParams",
    "LayerCache",
    "soft_threshold",
    "channelwise_1x1",
    "init_params",
    "ht_perceptron_forward",
    "ht_perceptron_backward",
]

CLASSICAL = "classical"
QUANTUM_EXACT = "quantum-exact"
QUANTUM_SHOTS = "quantum-shots"

BACKENDS = (CLASSICAL, QUANTUM_EXACT, QUANTUM_SHOTS)


@dataclass
class HTPerceptronParams:
    """Stacked per-path parameters.

    scales:     (P, H, W) multipliers applied in the transform domain
    thresholds: (P, H, W) non-negative soft-threshold levels
    kernels:    (P, C_out, C_in) channel-mixing weights (no bias)
    """

    scales: np.ndarray
    thresholds: np.ndarray
    kernels: np.ndarray

    @property
    def paths(self) -> int:
        return self.scales.shape[0]

    def validate(self) -> "HTPerceptronParams":
        if self.scales.ndim != 3 or self.thresholds.ndim != 3 or self.kernels.ndim != 3:
            raise ValueError("params must be stacked per-path 3D arrays")
        if self.scales.shape != self.thresholds.shape:
            raise ValueError(
                f"scale/threshold shape mismatch: {self.scales.shape} vs {self.thresholds.shape}"
            )
        if self.kernels.shape[0] != self.scales.shape[0]:
            raise ValueError("path count differs between kernels and scales")
        if np.any(self.thresholds < 0):
            raise ValueError("threshold entries must be non-negative")
        return self


@dataclass
class LayerCache:
    """Intermediates retained by the forward pass for the backward pass."""

    transformed: np.ndarray      # (B, C_in, H, W) Hadamard-domain input
    scaled: np.ndarray           # (P, B, C_in, H, W) after per-path scaling
    pre_threshold: np.ndarray    # (P, B, C_out, H, W) 1x1-mixed, before thresholding
    params: HTPerceptronParams
    backend: str


def soft_threshold(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """sign(x) * max(|x| - t, 0), with ``t`` broadcast over leading axes."""
    t = np.asarray(t)
    if np.any(t < 0):
        raise ValueError("threshold entries must be non-negative")
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def channelwise_1x1(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Per-pixel channel mixing: ``out[b,o,h,w] = sum_c kernel[o,c] x[b,c,h,w]``."""
    x = check_tensor4(x, pow2_spatial=False)
    kernel = np.asarray(kernel)
    if kernel.ndim != 2 or kernel.shape[1] != x.shape[1]:
        raise ValueError(
            f"kernel shape {kernel.shape} incompatible with {x.shape[1]} input channels"
        )
    return np.einsum("oc,bchw->bohw", kernel, x, optimize=True)


def init_params(paths: int, height: int, width: int, c_in: int, c_out: int,
                rng: np.random.Generator, dtype=np.float64) -> HTPerceptronParams:
    """Fresh layer parameters.

    Scales are uniform on [0, 1) and thresholds uniform on [0, 0.1), so the
    layer starts close to a mildly denoising pass-through. Channel kernels
    use fan-in-scaled uniform init, bound sqrt(1/C_in).
    """
    check_power_of_two(height, "layer height")
    check_power_of_two(width, "layer width")
    bound = np.sqrt(1.0 / c_in)
    return HTPerceptronParams(
        scales=rng.uniform(0.0, 1.0, (paths, height, width)).astype(dtype),
        thresholds=rng.uniform(0.0, 0.1, (paths, height, width)).astype(dtype),
        kernels=rng.uniform(-bound, bound, (paths, c_out, c_in)).astype(dtype),
    )


def _fwht2d_batch(x: np.ndarray, scale: float) -> np.ndarray:
    """Unnormalized butterfly over the last two axes of a (..., H, W) array."""
    out = x.copy()                                    # C-contiguous
    fwht_inplace(out)                                 # along W
    out = np.ascontiguousarray(out.swapaxes(-1, -2))
    fwht_inplace(out)                                 # along H
    out = np.ascontiguousarray(out.swapaxes(-1, -2))
    if scale != 1.0:
        out *= np.asarray(scale, dtype=out.dtype)
    return out


def _quantum_ht2d_batch(x: np.ndarray, scale: float, plan: MeasurementPlan,
                        stage: int) -> np.ndarray:
    """Hybrid-transform every (H, W) slice; rescale from symmetric to target."""
    b, c, h, w = x.shape
    out = np.empty_like(x)
    symmetric_to_target = scale * np.sqrt(h * w)
    for i in range(b):
        for j in range(c):
            sub = plan.with_seed(derive_seed(plan.seed, stage, i, j))
            out[i, j] = hybrid_ht2d(x[i, j].astype(np.float64), plan=sub) * symmetric_to_target
    return out


def ht_perceptron_forward(x: np.ndarray, params: HTPerceptronParams,
                          backend: str = CLASSICAL,
                          plan: MeasurementPlan | None = None):
    """Forward pass. Returns ``(y, cache)``.

    backend selects how the two 2D transforms are computed: ``classical``
    (fast butterfly), ``quantum-exact`` (statevector simulation, noise-free)
    or ``quantum-shots`` (statevector simulation with multinomial shot
    sampling; inference only).
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    x = check_tensor4(x)
    if x.dtype.kind != "f":
        x = x.astype(np.float64)
    params.validate()
    _, c_in, h, w = x.shape
    if params.scales.shape[1:] != (h, w):
        raise ValueError(
            f"scale matrices are {params.scales.shape[1:]}, input spatial dims are {(h, w)}"
        )
    if params.kernels.shape[2] != c_in:
        raise ValueError(
            f"kernels expect {params.kernels.shape[2]} input channels, got {c_in}"
        )
    if backend == QUANTUM_SHOTS:
        if plan is None or plan.mode != "sampled":
            raise ValueError("quantum-shots backend requires a sampled MeasurementPlan")
    elif backend == QUANTUM_EXACT:
        plan = MeasurementPlan(EXACT)

    inv_scale = 1.0 / (h * w)
    if backend == CLASSICAL:
        transformed = _fwht2d_batch(x, 1.0)
    else:
        transformed = _quantum_ht2d_batch(x, 1.0, plan, stage=0)

    scaled = transformed[None, :, :, :, :] * params.scales[:, None, None, :, :]
    pre_threshold = np.einsum("poc,pbchw->pbohw", params.kernels, scaled, optimize=True)
    path_out = np.sign(pre_threshold) * np.maximum(
        np.abs(pre_threshold) - params.thresholds[:, None, None, :, :], 0.0
    )
    summed = path_out.sum(axis=0)

    if backend == CLASSICAL:
        y = _fwht2d_batch(summed, inv_scale)
    else:
        y = _quantum_ht2d_batch(summed, inv_scale, plan, stage=1)

    cache = LayerCache(transformed=transformed, scaled=scaled,
                       pre_threshold=pre_threshold, params=params, backend=backend)
    return y, cache


def ht_perceptron_backward(cache: LayerCache, grad_y: np.ndarray):
    """Exact adjoint of the forward composition.

    Returns ``(grad_x, grad_scales, grad_thresholds, grad_kernels)`` with the
    stacked per-path layouts of :class:`HTPerceptronParams`. The
    soft-threshold subgradient treats ``|z| == t`` as dead (zero).
    """
    if cache.backend == QUANTUM_SHOTS:
        raise ValueError("backward through the shot-sampled backend is not supported")
    params = cache.params
    grad_y = check_tensor4(grad_y)
    if grad_y.dtype.kind != "f":
        grad_y = grad_y.astype(np.float64)
    _, _, h, w = grad_y.shape

    # adjoint of the 1/(H*W)-scaled inverse transform
    grad_sum = _fwht2d_batch(grad_y, 1.0 / (h * w))

    z = cache.pre_threshold
    t = params.thresholds[:, None, None, :, :]
    active = np.abs(z) > t
    grad_z = np.where(active, grad_sum[None], 0.0)
    grad_thresholds = -np.einsum("pbohw->phw", np.sign(z) * grad_z, optimize=True)

    grad_scaled = np.einsum("poc,pbohw->pbchw", params.kernels, grad_z, optimize=True)
    grad_kernels = np.einsum("pbohw,pbchw->poc", grad_z, cache.scaled, optimize=True)

    grad_scales = np.einsum("pbchw,bchw->phw", grad_scaled, cache.transformed, optimize=True)
    grad_transformed = np.einsum("pbchw,phw->bchw", grad_scaled, params.scales, optimize=True)

    # adjoint of the unnormalized forward transform
    grad_x = _fwht2d_batch(grad_transformed, 1.0)
    return grad_x, grad_scales, grad_thresholds, grad_kernels
