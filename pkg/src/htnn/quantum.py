"""Statevector simulation of the hybrid quantum-classical Hadamard transform.

The circuit is a single layer of Hadamard gates on M qubits applied to an
amplitude-encoded input, followed by measurement of all qubits. Because the
gates are real and the input amplitudes are real, the statevector never
leaves the reals and is stored as a plain float array.

Measurement runs in two modes: ``exact`` returns the squared amplitudes
directly (noise-free verification), ``sampled`` draws a multinomial with a
given shot count. Sampling uses the counter-based Philox generator so that
seeds reproduce across platforms; ``RNG_FAMILY`` is recorded in checkpoint
metadata by the training stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hadamard import fht1d, naive_ht
from .validation import as_matrix, as_vector, check_power_of_two, derive_seed

__all__ = [
    "RNG_FAMILY",
    "EXACT",
    "SAMPLED",
    "MeasurementPlan",
    "Statevector",
    "HybridHTReport",
    "prepare_state",
    "apply_hadamard_all",
    "measure",
    "default_epsilon",
    "hybrid_ht",
    "hybrid_ht2d",
    "lemma1_check",
    "run_lemma1_trials",
]

RNG_FAMILY = "philox"

EXACT = "exact"
SAMPLED = "sampled"

_H_GATE = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


@dataclass(frozen=True)
class MeasurementPlan:
    """How to turn a statevector into outcome probabilities.

    ``sampled`` mode with the same seed and shot count is bit-reproducible.
    """

    mode: str = EXACT
    shots: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (EXACT, SAMPLED):
            raise ValueError(f"unknown measurement mode {self.mode!r}")
        if self.mode == SAMPLED and self.shots <= 0:
            raise ValueError("sampled measurement requires a positive shot count")

    def with_seed(self, seed: int) -> "MeasurementPlan":
        return MeasurementPlan(self.mode, self.shots, seed)


@dataclass
class Statevector:
    """Real amplitude vector over the 2^M computational basis states."""

    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.float64)
        if self.amplitudes.shape != (2 ** self.num_qubits,):
            raise ValueError(
                f"amplitude length {self.amplitudes.shape} does not match "
                f"{self.num_qubits} qubits"
            )
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"statevector norm drifted to {norm!r}")


def prepare_state(xbar) -> Statevector:
    """Amplitude-encode a unit-norm vector into an M-qubit register."""
    a = as_vector(xbar)
    norm = np.linalg.norm(a)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"state preparation requires a unit-norm vector, got norm {norm}")
    m = int(np.log2(a.shape[0]))
    return Statevector(a / norm, m)


def apply_hadamard_all(state: Statevector) -> Statevector:
    """Apply one Hadamard gate to every qubit (H tensor-power M).

    Gate-by-gate application on the reshaped amplitude tensor; equivalent to
    the symmetric-normalized Hadamard transform of the amplitudes.
    """
    m = state.num_qubits
    if m == 0:
        return Statevector(state.amplitudes.copy(), 0)
    psi = state.amplitudes.reshape([2] * m)
    for q in range(m):
        psi = np.moveaxis(np.tensordot(_H_GATE, np.moveaxis(psi, q, 0), axes=([1], [0])), 0, q)
    return Statevector(np.ascontiguousarray(psi).reshape(-1), m)


def measure(state: Statevector, plan: MeasurementPlan) -> np.ndarray:
    """Outcome probabilities for measuring all qubits under the plan."""
    p = state.amplitudes ** 2
    p = p / p.sum()
    if plan.mode == EXACT:
        return p
    rng = np.random.Generator(np.random.Philox(plan.seed))
    counts = rng.multinomial(plan.shots, p)
    return counts / plan.shots


@dataclass
class HybridHTReport:
    """Output of the hybrid transform plus its internal bookkeeping values."""

    result: np.ndarray
    b: float
    c: float
    delta: float
    probabilities: np.ndarray = field(repr=False)


def default_epsilon(x) -> float:
    """Relative offset margin: keeps the normalization well-conditioned across scales."""
    return 1e-3 * (1.0 + float(np.sum(np.abs(x))))


def hybrid_ht(x, epsilon: float | None = None,
              plan: MeasurementPlan = MeasurementPlan()) -> HybridHTReport:
    """Hybrid quantum-classical Hadamard transform of a real vector.

    The first entry is replaced by ``b = epsilon + sum(|x_k|)`` so every
    transform coefficient of the shifted vector is strictly positive and the
    square root of the measured probability is sign-unambiguous. The shift
    is undone classically with ``delta = sqrt(1/N) * (b - x[0])``:

        X_k = c * sqrt(p_k) - delta

    In ``exact`` mode the result equals ``fht1d(x, "symmetric")``.
    """
    xv = as_vector(x)
    n = xv.shape[0]
    if epsilon is None:
        epsilon = default_epsilon(xv)
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")

    b = epsilon + float(np.sum(np.abs(xv)))
    shifted = xv.copy()
    shifted[0] = b
    c = float(np.linalg.norm(shifted))
    state = prepare_state(shifted / c)
    state = apply_hadamard_all(state)
    probs = measure(state, plan)
    delta = np.sqrt(1.0 / n) * (b - xv[0])
    result = c * np.sqrt(probs) - delta
    return HybridHTReport(result=result, b=b, c=c, delta=float(delta), probabilities=probs)


def hybrid_ht2d(x, epsilon: float | None = None,
                plan: MeasurementPlan = MeasurementPlan()) -> np.ndarray:
    """Separable 2D hybrid transform: every row, then every column.

    Each 1D call gets its own sub-seed derived from ``(plan.seed, pass,
    index)``, so row transforms may run in parallel without losing
    reproducibility.
    """
    a = as_matrix(x).copy()
    for i in range(a.shape[0]):
        sub = plan.with_seed(derive_seed(plan.seed, 0, i))
        a[i, :] = hybrid_ht(a[i, :], epsilon, sub).result
    for j in range(a.shape[1]):
        sub = plan.with_seed(derive_seed(plan.seed, 1, j))
        a[:, j] = hybrid_ht(a[:, j], epsilon, sub).result
    return a


def lemma1_check(x) -> bool:
    """True iff every Hadamard-transform entry of ``x`` is strictly positive.

    Holds whenever ``x[0] > sum_{k>=1} |x_k|``; the hybrid transform's shift
    constructs exactly that situation.
    """
    return bool(np.all(naive_ht(x) > 0))


def run_lemma1_trials(n: int = 64, trials: int = 1000, seed: int = 0) -> dict:
    """Property suite: shifted vectors always have strictly positive transforms."""
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(trials):
        x = rng.uniform(-10.0, 10.0, n)
        eps = float(rng.uniform(1e-6, 10.0))
        shifted = x.copy()
        shifted[0] = eps + np.sum(np.abs(x))
        if not lemma1_check(shifted):
            violations += 1
    # cross-check against the fast transform as well
    x = rng.uniform(-1.0, 1.0, n)
    shifted = x.copy()
    shifted[0] = 1e-9 + np.sum(np.abs(x))
    fht_positive = bool(np.all(fht1d(shifted) > 0))
    ok = violations == 0 and fht_positive
    return {"theorem": "lemma1", "trials": trials, "violations": violations, "ok": ok}
