"""AMSGrad optimizer: Adam with a running elementwise maximum of the second moment."""

from __future__ import annotations

import numpy as np


class AmsGrad:
    """Keeps m, v and the non-decreasing v_max per parameter tensor.

    Update: m and v as in Adam, v_max = max(v_max, v), then a bias-corrected
    step param -= lr * m_hat / (sqrt(v_max / (1 - beta2^t)) + eps), so the
    first step with a nonzero gradient has magnitude ~= lr.
    """

    def __init__(self, params, learning_rate=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.v_max = [np.zeros_like(p) for p in params]

    def step(self, params, grads) -> None:
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ValueError("parameter/gradient count does not match optimizer state")
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for p, g, m, v, vmax in zip(params, grads, self.m, self.v, self.v_max):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * np.square(g)
            np.maximum(vmax, v, out=vmax)
            p -= self.learning_rate * (m / bc1) / (np.sqrt(vmax / bc2) + self.epsilon)


def amsgrad_step(state: AmsGrad, params, grads):
    """Functional wrapper: one in-place update; returns (params, state)."""
    state.step(params, grads)
    return params, state
