"""Adadelta optimizer with per-parameter accumulators.

Update rule (Zeiler's method): running averages of squared gradients and
squared updates with decay ``rho``; the learning rate multiplies the
computed delta. Non-negative parameters (soft-threshold levels) are
projected back to >= 0 after every step.
"""

from __future__ import annotations

import numpy as np

from .network import Param

__all__ = ["Adadelta"]


class Adadelta:
    def __init__(self, params: list[Param], rho: float = 0.9, eps: float = 1e-6):
        self.params = params
        self.rho = rho
        self.eps = eps
        self._sq_grad = [np.zeros_like(p.value) for p in params]
        self._sq_delta = [np.zeros_like(p.value) for p in params]

    def step(self, lr: float = 1.0):
        rho, eps = self.rho, self.eps
        for p, eg, ed in zip(self.params, self._sq_grad, self._sq_delta):
            g = p.grad
            eg *= rho
            eg += (1.0 - rho) * g * g
            delta = np.sqrt(ed + eps) / np.sqrt(eg + eps) * g
            p.value -= lr * delta
            ed *= rho
            ed += (1.0 - rho) * delta * delta
            if p.nonneg:
                np.maximum(p.value, 0.0, out=p.value)
