"""Minimal Adam optimizer for named parameter groups."""

from __future__ import annotations

import numpy as np


class Adam:
    """Adam with per-group learning rates; state keyed by group name."""

    def __init__(self, lrs: dict[str, float], beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lrs = dict(lrs)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray],
             grads: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        """Return updated copies of ``params`` given matching ``grads``."""
        self.t += 1
        out = {}
        for name, p in params.items():
            g = np.asarray(grads[name], dtype=float)
            if name not in self._m:
                self._m[name] = np.zeros_like(g)
                self._v[name] = np.zeros_like(g)
            m = self._m[name] = self.beta1 * self._m[name] + (1 - self.beta1) * g
            v = self._v[name] = self.beta2 * self._v[name] + (1 - self.beta2) * g * g
            mhat = m / (1 - self.beta1 ** self.t)
            vhat = v / (1 - self.beta2 ** self.t)
            out[name] = p - self.lrs[name] * mhat / (np.sqrt(vhat) + self.eps)
        return out
