"""Classical Hadamard-transform kernels.

Provides the naive matrix-product transform (the correctness oracle), the
fast butterfly transform in 1D and 2D, the dyadic (XOR) convolution, and a
verifier for the Hadamard convolution theorem.

Two normalization conventions are supported:

* ``"symmetric"``      -- sqrt(1/N) on both forward and inverse; the
  transform is then involutory and energy preserving.
* ``"folded-inverse"`` -- 1 on the forward, 1/N on the inverse; avoids the
  square root and is the convention used inside the network layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import (
    FOLDED_INVERSE,
    SYMMETRIC,
    as_matrix,
    as_vector,
    check_convention,
    check_power_of_two,
)

__all__ = [
    "SYMMETRIC",
    "FOLDED_INVERSE",
    "hadamard_matrix",
    "naive_ht",
    "naive_ht2d",
    "fht1d",
    "ifht1d",
    "fht2d",
    "ifht2d",
    "fwht_inplace",
    "fwht_along_axis",
    "dyadic_conv",
    "conv_theorem_check",
    "ConvTheoremReport",
    "run_involution_trials",
    "run_conv_theorem_trials",
]


def hadamard_matrix(n: int, dtype=np.int64) -> np.ndarray:
    """Unnormalized +-1 Hadamard matrix of power-of-two order (Sylvester construction)."""
    check_power_of_two(n, "matrix order")
    h = np.array([[1]], dtype=dtype)
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return h


def _forward_scale(n: int, convention: str) -> float:
    return 1.0 / np.sqrt(n) if convention == SYMMETRIC else 1.0


def _inverse_scale(n: int, convention: str) -> float:
    return 1.0 / np.sqrt(n) if convention == SYMMETRIC else 1.0 / n


def naive_ht(x, convention: str = SYMMETRIC) -> np.ndarray:
    """O(N^2) matrix-product Hadamard transform; the oracle for ``fht1d``."""
    check_convention(convention)
    a = as_vector(x)
    n = a.shape[0]
    h = hadamard_matrix(n).astype(np.float64)
    return _forward_scale(n, convention) * (h @ a)


def naive_ht2d(x, convention: str = SYMMETRIC) -> np.ndarray:
    """O(N^3) double matrix-product 2D transform; the oracle for ``fht2d``."""
    check_convention(convention)
    a = as_matrix(x)
    rows, cols = a.shape
    hr = hadamard_matrix(rows).astype(np.float64)
    hc = hadamard_matrix(cols).astype(np.float64)
    scale = _forward_scale(rows, convention) * _forward_scale(cols, convention)
    return scale * (hr @ a @ hc)


def fwht_inplace(a: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard butterfly along the last axis, in place.

    ``a`` must be C-contiguous with a power-of-two last axis. Natural
    (Hadamard) ordering; no permutation stage.
    """
    n = a.shape[-1]
    if n == 1:
        return a
    flat = a.reshape(-1, n)
    h = 1
    while h < n:
        v = flat.reshape(-1, n // (2 * h), 2, h)
        lo = v[:, :, 0, :]
        hi = v[:, :, 1, :]
        diff = lo - hi
        lo += hi
        hi[...] = diff
        h *= 2
    return a


def fwht_along_axis(x: np.ndarray, axis: int) -> np.ndarray:
    """Unnormalized butterfly transform of ``x`` along ``axis`` (returns a copy)."""
    check_power_of_two(x.shape[axis], "transform length")
    dtype = x.dtype if x.dtype.kind == "f" else np.float64
    out = np.moveaxis(x, axis, -1).astype(dtype)  # C-contiguous copy
    fwht_inplace(out)
    return np.moveaxis(out, -1, axis)


def fht1d(x, convention: str = SYMMETRIC) -> np.ndarray:
    """O(N log N) fast Hadamard transform. Matches ``naive_ht`` to 1e-12."""
    check_convention(convention)
    a = as_vector(x).copy()
    fwht_inplace(a)
    a *= _forward_scale(a.shape[0], convention)
    return a


def ifht1d(x, convention: str = SYMMETRIC) -> np.ndarray:
    """Inverse of ``fht1d`` under the same convention."""
    check_convention(convention)
    a = as_vector(x).copy()
    fwht_inplace(a)
    a *= _inverse_scale(a.shape[0], convention)
    return a


def fht2d(x, convention: str = SYMMETRIC) -> np.ndarray:
    """Separable 2D fast Hadamard transform: every row, then every column."""
    check_convention(convention)
    a = as_matrix(x).copy()
    fwht_inplace(a)                # rows
    a = np.ascontiguousarray(a.T)
    fwht_inplace(a)                # columns
    a = a.T
    scale = _forward_scale(a.shape[0], convention) * _forward_scale(a.shape[1], convention)
    return np.ascontiguousarray(a * scale)


def ifht2d(x, convention: str = SYMMETRIC) -> np.ndarray:
    """Inverse of ``fht2d`` under the same convention."""
    check_convention(convention)
    a = as_matrix(x).copy()
    fwht_inplace(a)
    a = np.ascontiguousarray(a.T)
    fwht_inplace(a)
    a = a.T
    scale = _inverse_scale(a.shape[0], convention) * _inverse_scale(a.shape[1], convention)
    return np.ascontiguousarray(a * scale)


def dyadic_conv(a, x) -> np.ndarray:
    """Dyadic (XOR) convolution, ``y[n] = sum_m a[m] * x[n ^ m]``.

    O(N^2) brute force; serves as the time-domain oracle for the
    convolution theorem.
    """
    av = as_vector(a)
    xv = as_vector(x)
    if av.shape[0] != xv.shape[0]:
        raise ValueError(f"length mismatch: {av.shape[0]} vs {xv.shape[0]}")
    idx = np.arange(av.shape[0])
    table = idx[:, None] ^ idx[None, :]
    return xv[table] @ av


@dataclass
class ConvTheoremReport:
    ok: bool
    max_abs_error: float
    tol: float

    def __bool__(self) -> bool:
        return self.ok


def conv_theorem_check(a, x, tol: float = 1e-10) -> ConvTheoremReport:
    """Check the Hadamard convolution theorem on one pair of vectors.

    With symmetric sqrt(1/N) transforms the identity carries an explicit
    sqrt(N) factor:

        H(a *_d x) = sqrt(N) * H(a) o H(x)

    (with unnormalized transforms the factor is 1). The report carries the
    maximum absolute deviation between the two sides.
    """
    av = as_vector(a)
    xv = as_vector(x)
    if av.shape[0] != xv.shape[0]:
        raise ValueError(f"length mismatch: {av.shape[0]} vs {xv.shape[0]}")
    n = av.shape[0]
    lhs = fht1d(dyadic_conv(av, xv), SYMMETRIC)
    rhs = np.sqrt(n) * fht1d(av, SYMMETRIC) * fht1d(xv, SYMMETRIC)
    err = float(np.max(np.abs(lhs - rhs)))
    return ConvTheoremReport(ok=err < tol, max_abs_error=err, tol=tol)


def run_involution_trials(max_n: int = 4096, trials: int = 20, tol: float = 1e-12,
                          seed: int = 0) -> dict:
    """Property suite: fht1d(fht1d(x)) == x under the symmetric convention."""
    rng = np.random.default_rng(seed)
    sizes = [2 ** m for m in range(0, int(np.log2(max_n)) + 1)]
    worst = 0.0
    count = 0
    for n in sizes:
        for _ in range(trials):
            x = rng.standard_normal(n)
            back = fht1d(fht1d(x, SYMMETRIC), SYMMETRIC)
            scale = max(1.0, float(np.max(np.abs(x))))
            worst = max(worst, float(np.max(np.abs(back - x))) / scale)
            count += 1
    return {"theorem": "involution", "trials": count, "max_rel_error": worst,
            "tol": tol, "ok": worst < tol}


def run_conv_theorem_trials(max_n: int = 256, trials: int = 1000, tol: float = 1e-10,
                            seed: int = 0) -> dict:
    """Property suite: H(a *_d x) == sqrt(N) H(a) o H(x) over random pairs."""
    rng = np.random.default_rng(seed)
    sizes = [2 ** m for m in range(1, int(np.log2(max_n)) + 1)]
    worst = 0.0
    count = 0
    for n in sizes:
        for _ in range(trials):
            a = rng.uniform(-1.0, 1.0, n)
            x = rng.uniform(-1.0, 1.0, n)
            rep = conv_theorem_check(a, x, tol)
            worst = max(worst, rep.max_abs_error)
            count += 1
    return {"theorem": "conv", "trials": count, "max_abs_error": worst,
            "tol": tol, "ok": worst < tol}
