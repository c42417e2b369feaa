"""Micro-benchmarks for the transform kernels."""

from __future__ import annotations

import time

import numpy as np

from .hadamard import fht1d, naive_ht
from .quantum import MeasurementPlan, hybrid_ht

__all__ = ["benchmark_transforms"]


def _median_ns(fn, reps: int) -> float:
    times = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        times.append(time.perf_counter_ns() - t0)
    return float(np.median(times))


def benchmark_transforms(sizes: list[int], reps: int = 20, seed: int = 0) -> list[dict]:
    """Median ns/op for the naive, fast, and hybrid-exact transforms."""
    rng = np.random.default_rng(seed)
    plan = MeasurementPlan()
    rows = []
    for n in sizes:
        x = rng.standard_normal(n)
        naive_ht(x)  # warm up construction paths
        fht1d(x)
        hybrid_ht(x, plan=plan)
        rows.append({
            "n": n,
            "naive_ns": _median_ns(lambda: naive_ht(x), reps),
            "fht_ns": _median_ns(lambda: fht1d(x), reps),
            "hybrid_exact_ns": _median_ns(lambda: hybrid_ht(x, plan=plan), reps),
        })
    return rows
