"""Input validation helpers shared by the transform and layer modules."""

from __future__ import annotations

import numpy as np

SYMMETRIC = "symmetric"
FOLDED_INVERSE = "folded-inverse"

CONVENTIONS = (SYMMETRIC, FOLDED_INVERSE)


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def check_power_of_two(n: int, what: str = "length") -> int:
    if not is_power_of_two(int(n)):
        raise ValueError(f"{what} must be a power of two, got {n}")
    return int(n)


def check_convention(convention: str) -> str:
    if convention not in CONVENTIONS:
        raise ValueError(
            f"unknown normalization convention {convention!r}; expected one of {CONVENTIONS}"
        )
    return convention


def as_vector(x, dtype=np.float64) -> np.ndarray:
    """Coerce to a 1D float array with power-of-two length."""
    a = np.asarray(x, dtype=dtype)
    if a.ndim != 1:
        raise ValueError(f"expected a 1D vector, got shape {a.shape}")
    check_power_of_two(a.shape[0], "vector length")
    return a

def as_matrix(x, dtype=np.float64) -> np.ndarray:
    """Coerce to a 2D float array with power-of-two sides."""
    a = np.asarray(x, dtype=dtype)
    if a.ndim != 2:
        raise ValueError(f"expected a 2D matrix, got shape {a.shape}")
    check_power_of_two(a.shape[0], "matrix row count")
    check_power_of_two(a.shape[1], "matrix column count")
    return a


def check_tensor4(x: np.ndarray, pow2_spatial: bool = True) -> np.ndarray:
    """Validate a (batch, channel, height, width) tensor."""
    a = np.asarray(x)
    if a.ndim != 4:
        raise ValueError(f"expected a (B, C, H, W) tensor, got shape {a.shape}")
    if pow2_spatial:
        check_power_of_two(a.shape[2], "tensor height")
        check_power_of_two(a.shape[3], "tensor width")
    return a


def derive_seed(base: int, *path: int) -> int:
    """Derive a child seed from a base seed and an integer path.

    Deterministic and independent of call order, so parallel workers can
    derive their own streams.
    """
    ss = np.random.SeedSequence(entropy=(int(base),) + tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])
