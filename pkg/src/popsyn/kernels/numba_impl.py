"""Numba-compiled twins of the kernels in `numpy_impl`."""

import math

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def elu_forward(z):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        for j in range(z.shape[1]):
            v = z[i, j]
            out[i, j] = v if v >= 0.0 else math.expm1(v)
    return out


@njit(cache=True)
def elu_backward(z, gout):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        for j in range(z.shape[1]):
            v = z[i, j]
            out[i, j] = gout[i, j] if v >= 0.0 else gout[i, j] * math.exp(v)
    return out


@njit(cache=True)
def sigmoid_forward(z):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        for j in range(z.shape[1]):
            v = z[i, j]
            if v >= 0.0:
                out[i, j] = 1.0 / (1.0 + math.exp(-v))
            else:
                ev = math.exp(v)
                out[i, j] = ev / (1.0 + ev)
    return out


@njit(cache=True)
def sigmoid_backward(a, gout):
    out = np.empty_like(a)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            out[i, j] = gout[i, j] * a[i, j] * (1.0 - a[i, j])
    return out


@njit(cache=True)
def softmax_blocks_forward(z, starts, ends):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        for b in range(starts.shape[0]):
            s, e = starts[b], ends[b]
            m = z[i, s]
            for j in range(s + 1, e):
                if z[i, j] > m:
                    m = z[i, j]
            total = 0.0
            for j in range(s, e):
                v = math.exp(z[i, j] - m)
                out[i, j] = v
                total += v
            for j in range(s, e):
                out[i, j] /= total
    return out


@njit(cache=True)
def softmax_blocks_backward(p, gout, starts, ends):
    out = np.empty_like(p)
    for i in range(p.shape[0]):
        for b in range(starts.shape[0]):
            s, e = starts[b], ends[b]
            dot = 0.0
            for j in range(s, e):
                dot += gout[i, j] * p[i, j]
            for j in range(s, e):
                out[i, j] = p[i, j] * (gout[i, j] - dot)
    return out


@njit(cache=True)
def binary_ce_value_grad(x, p, clamp):
    hi = 1.0 - clamp
    value = 0.0
    grad = np.empty_like(p)
    for i in range(p.shape[0]):
        for j in range(p.shape[1]):
            pc = min(max(p[i, j], clamp), hi)
            xv = x[i, j]
            value -= xv * math.log(pc) + (1.0 - xv) * math.log(1.0 - pc)
            grad[i, j] = -xv / pc + (1.0 - xv) / (1.0 - pc)
    return value, grad


@njit(cache=True)
def rmsprop_update(param, grad, acc, lr, decay, eps):
    for i in range(param.shape[0]):
        acc[i] = acc[i] * decay + (1.0 - decay) * grad[i] * grad[i]
        param[i] -= lr * grad[i] / (math.sqrt(acc[i]) + eps)


@njit(cache=True)
def categorical_blocks(p, starts, ends, u):
    n, nb = p.shape[0], starts.shape[0]
    out = np.empty((n, nb), dtype=np.int64)
    for i in range(n):
        for b in range(nb):
            s, e = starts[b], ends[b]
            total = 0.0
            for j in range(s, e):
                total += p[i, j]
            target = u[i, b] * total
            k = e - 1 - s
            acc = 0.0
            for j in range(s, e):
                acc += p[i, j]
                if target < acc:
                    k = j - s
                    break
            out[i, b] = k
    return out
