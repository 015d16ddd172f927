"""Pure-numpy implementations of the hot kernels.

Fallback path for environments without numba (or with POPSYN_BACKEND=numpy).
Each function mirrors the numba twin in `numba_impl` operation-for-operation so
the two backends agree to floating-point roundoff.
"""

import numpy as np

NAME = "numpy"


def elu_forward(z):
    return np.where(z >= 0.0, z, np.expm1(z))


def elu_backward(z, gout):
    return np.where(z >= 0.0, gout, gout * np.exp(z))


def sigmoid_forward(z):
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid_backward(a, gout):
    return gout * a * (1.0 - a)


def _expand(block_values, lengths):
    return np.repeat(block_values, lengths, axis=1)


def softmax_blocks_forward(z, starts, ends):
    lengths = ends - starts
    bmax = np.maximum.reduceat(z, starts, axis=1)
    e = np.exp(z - _expand(bmax, lengths))
    s = np.add.reduceat(e, starts, axis=1)
    return e / _expand(s, lengths)


def softmax_blocks_backward(p, gout, starts, ends):
    lengths = ends - starts
    dots = np.add.reduceat(gout * p, starts, axis=1)
    return p * (gout - _expand(dots, lengths))


def binary_ce_value_grad(x, p, clamp):
    """Summed elementwise binary cross-entropy and its gradient w.r.t. p.

    p is clamped into [clamp, 1-clamp] before the logs; the gradient is the
    constant extension of the clamped loss.
    """
    pc = np.clip(p, clamp, 1.0 - clamp)
    value = -np.sum(x * np.log(pc) + (1.0 - x) * np.log(1.0 - pc))
    grad = -x / pc + (1.0 - x) / (1.0 - pc)
    return value, grad


def rmsprop_update(param, grad, acc, lr, decay, eps):
    acc *= decay
    acc += (1.0 - decay) * grad * grad
    param -= lr * grad / (np.sqrt(acc) + eps)


def categorical_blocks(p, starts, ends, u):
    """Inverse-CDF draw per (row, block); returns within-block indices."""
    n, nb = p.shape[0], starts.shape[0]
    out = np.empty((n, nb), dtype=np.int64)
    for b in range(nb):
        block = p[:, starts[b]:ends[b]]
        c = np.cumsum(block, axis=1)
        target = u[:, b] * c[:, -1]
        idx = np.sum(c <= target[:, None], axis=1)
        out[:, b] = np.minimum(idx, block.shape[1] - 1)
    return out
