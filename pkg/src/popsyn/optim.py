"""RMSProp.

acc <- decay * acc + (1 - decay) * g^2
p   <- p - lr * g / (sqrt(acc) + eps)

Gradient buffers are zeroed after each step so layers can keep accumulating
into them between steps.
"""

import numpy as np

from . import kernels as K
from .errors import ShapeMismatchError


class RmsProp:
    def __init__(self, learning_rate=0.001, decay=0.9, eps=1e-8):
        if learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be positive, got {learning_rate}")
        if not 0.0 < decay < 1.0:
            raise ValueError(f"decay must be in (0, 1), got {decay}")
        if eps <= 0.0:
            raise ValueError(f"eps must be positive, got {eps}")
        self.learning_rate = learning_rate
        self.decay = decay
        self.eps = eps
        self._acc = None

    def step(self, params, grads):
        """Update params in place from grads, then zero the grads."""
        if self._acc is None:
            self._acc = [np.zeros_like(p) for p in params]
        if len(params) != len(self._acc):
            raise ShapeMismatchError(
                f"optimizer tracks {len(self._acc)} parameter arrays, got {len(params)}"
            )
        for p, g, a in zip(params, grads, self._acc):
            if p.shape != g.shape or p.shape != a.shape:
                raise ShapeMismatchError(
                    f"parameter/gradient/accumulator shapes differ: "
                    f"{p.shape} vs {g.shape} vs {a.shape}"
                )
            K.rmsprop_update(
                p.reshape(-1), g.reshape(-1), a.reshape(-1),
                self.learning_rate, self.decay, self.eps,
            )
            g[...] = 0.0

    @property
    def accumulators(self):
        return self._acc


def rmsprop_step(state: RmsProp, params, grads):
    """Functional form of RmsProp.step."""
    state.step(params, grads)
    return params
