"""Dense feed-forward networks with analytic backpropagation.

Everything is float64 numpy. Layers cache the forward pass so `backward`
can accumulate exact gradients into per-layer buffers; an optimizer step is
expected to consume and zero those buffers.
"""

import numpy as np

from . import kernels as K
from .errors import ShapeMismatchError, StateError

ACTIVATIONS = ("identity", "relu", "elu", "sigmoid", "softmax_blocks")


def elu(x):
    """ELU with alpha = 1: x for x >= 0, exp(x) - 1 below."""
    arr = np.asarray(x, dtype=np.float64)
    out = np.where(arr >= 0.0, arr, np.expm1(arr))
    return float(out) if out.ndim == 0 else out


def glorot_uniform(rng, out_width, in_width):
    lim = np.sqrt(6.0 / (in_width + out_width))
    return rng.uniform(-lim, lim, size=(out_width, in_width))


class DenseLayer:
    """One affine map plus activation: act(x @ W.T + b).

    weights has shape (out_width, in_width). For the softmax_blocks
    activation, `blocks` lists the output segment lengths; each segment is
    normalized independently.
    """

    def __init__(self, in_width, out_width, activation="identity", blocks=None, rng=None):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        if activation == "softmax_blocks":
            if blocks is None or sum(blocks) != out_width:
                raise ValueError(
                    f"softmax_blocks needs block lengths summing to {out_width}, got {blocks}"
                )
            self.blocks = tuple(int(b) for b in blocks)
            ends = np.cumsum(self.blocks).astype(np.int64)
            self.block_starts = np.concatenate(([0], ends[:-1])).astype(np.int64)
            self.block_ends = ends
        else:
            if blocks is not None:
                raise ValueError("blocks only apply to the softmax_blocks activation")
            self.blocks = None
            self.block_starts = None
            self.block_ends = None
        self.in_width = int(in_width)
        self.out_width = int(out_width)
        self.activation = activation
        if rng is None:
            self.weights = np.zeros((out_width, in_width))
        else:
            self.weights = glorot_uniform(rng, out_width, in_width)
        self.bias = np.zeros(out_width)
        self.grad_weights = np.zeros_like(self.weights)
        self.grad_bias = np.zeros_like(self.bias)
        self._cache = None

    def forward(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_width:
            raise ShapeMismatchError(
                f"input of shape {x.shape} incompatible with layer weights "
                f"of shape {self.weights.shape}"
            )
        z = x @ self.weights.T + self.bias
        if self.activation == "identity":
            a = z
        elif self.activation == "relu":
            a = np.maximum(z, 0.0)
        elif self.activation == "elu":
            a = K.elu_forward(z)
        elif self.activation == "sigmoid":
            a = K.sigmoid_forward(z)
        else:
            a = K.softmax_blocks_forward(z, self.block_starts, self.block_ends)
        self._cache = (x, z, a)
        return a

    def backward(self, gout):
        """Accumulate parameter gradients; return the gradient w.r.t. the input."""
        if self._cache is None:
            raise StateError("backward called before forward on this layer")
        x, z, a = self._cache
        gout = np.ascontiguousarray(gout, dtype=np.float64)
        if gout.shape != a.shape:
            raise ShapeMismatchError(
                f"upstream gradient of shape {gout.shape} does not match "
                f"activation output of shape {a.shape}"
            )
        if self.activation == "identity":
            gz = gout
        elif self.activation == "relu":
            gz = gout * (z > 0.0)
        elif self.activation == "elu":
            gz = K.elu_backward(z, gout)
        elif self.activation == "sigmoid":
            gz = K.sigmoid_backward(a, gout)
        else:
            gz = K.softmax_blocks_backward(a, gout, self.block_starts, self.block_ends)
        self.grad_weights += gz.T @ x
        self.grad_bias += gz.sum(axis=0)
        return gz @ self.weights

    def zero_grads(self):
        self.grad_weights[...] = 0.0
        self.grad_bias[...] = 0.0


class Mlp:
    """A stack of DenseLayers trained as one unit."""

    def __init__(self, layers):
        self.layers = list(layers)
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_width != nxt.in_width:
                raise ShapeMismatchError(
                    f"layer widths do not chain: {prev.out_width} -> {nxt.in_width}"
                )

    @property
    def in_width(self):
        return self.layers[0].in_width

    @property
    def out_width(self):
        return self.layers[-1].out_width

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, gout):
        for layer in reversed(self.layers):
            gout = layer.backward(gout)
        return gout

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()

    def parameters(self):
        out = []
        for layer in self.layers:
            out.extend((layer.weights, layer.bias))
        return out

    def grads(self):
        out = []
        for layer in self.layers:
            out.extend((layer.grad_weights, layer.grad_bias))
        return out


def feedforward(in_width, hidden_layers, hidden_units, out_width, rng,
                hidden_activation="elu", out_activation="identity", out_blocks=None):
    """Build the standard shape used here: n hidden layers plus one output head."""
    layers = []
    width = in_width
    for _ in range(hidden_layers):
        layers.append(DenseLayer(width, hidden_units, hidden_activation, rng=rng))
        width = hidden_units
    layers.append(DenseLayer(width, out_width, out_activation, blocks=out_blocks, rng=rng))
    return Mlp(layers)
