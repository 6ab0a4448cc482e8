"""Minimal dense network with hand-written backprop.

Only what the modem needs: fully connected layers, ReLU, mean squared
error, and plain SGD.  Forward passes cache their inputs; backward passes
accumulate parameter gradients and return the gradient with respect to
the layer input.
"""

import numpy as np


class Dense:
    """y = x @ W + b with uniform(-1/sqrt(n_in), 1/sqrt(n_in)) init."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator | None = None):
        self.n_in = n_in
        self.n_out = n_out
        bound = 1.0 / np.sqrt(n_in)
        if rng is None:
            self.W = np.zeros((n_in, n_out))
            self.b = np.zeros(n_out)
        else:
            self.W = rng.uniform(-bound, bound, size=(n_in, n_out))
            self.b = rng.uniform(-bound, bound, size=n_out)
        self.gW = np.zeros_like(self.W)
        self.gb = np.zeros_like(self.b)
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.W + self.b

    def backward(self, gout: np.ndarray) -> np.ndarray:
        self.gW += self._x.T @ gout
        self.gb += gout.sum(axis=0)
        return gout @ self.W.T

    def zero_grad(self):
        self.gW[:] = 0.0
        self.gb[:] = 0.0

    def sgd_step(self, lr: float):
        self.W -= lr * self.gW
        self.b -= lr * self.gb

    @property
    def macs(self) -> int:
        # one multiply-accumulate per weight per input sample
        return self.n_in * self.n_out


class Relu:
    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, gout: np.ndarray) -> np.ndarray:
        return gout * self._mask


class Mlp:
    """Dense stack with ReLU between layers and identity output."""

    def __init__(self, widths: list[int], rng: np.random.Generator | None = None):
        if len(widths) < 2:
            raise ValueError("need at least input and output width")
        self.widths = list(widths)
        self.layers = []
        for i in range(len(widths) - 1):
            self.layers.append(Dense(widths[i], widths[i + 1], rng))
            if i < len(widths) - 2:
                self.layers.append(Relu())

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, gout: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            gout = layer.backward(gout)
        return gout

    def dense_layers(self) -> list[Dense]:
        return [l for l in self.layers if isinstance(l, Dense)]

    def zero_grad(self):
        for l in self.dense_layers():
            l.zero_grad()

    def sgd_step(self, lr: float):
        for l in self.dense_layers():
            l.sgd_step(lr)

    @property
    def macs(self) -> int:
        return sum(l.macs for l in self.dense_layers())


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Batch-mean squared Euclidean distance and its gradient w.r.t. pred."""
    diff = pred - target
    n = pred.shape[0]
    loss = float(np.sum(diff * diff) / n)
    return loss, 2.0 * diff / n
