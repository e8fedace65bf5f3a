"""Adam optimizer over a list of parameter tensors."""

from __future__ import annotations

import numpy as np

from .errors import StateError

DEFAULT_LR = 1e-4


class Adam:
    """Standard Adam with bias correction, updating parameters in place.

    State (first/second moments, step counter) is initialized to zero and
    kept per parameter; a gradient whose shape disagrees with its state is
    a StateError.
    """

    def __init__(self, params, lr=DEFAULT_LR, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1**self.t
        bc2 = 1.0 - b2**self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            if g is None:
                continue
            if g.shape != m.shape:
                raise StateError(
                    f"gradient shape {g.shape} does not match optimizer state {m.shape}"
                )
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
