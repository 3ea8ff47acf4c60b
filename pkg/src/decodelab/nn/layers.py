"""Dense / conv / ReLU layers with explicit backprop, batch-first channels-last.

Every layer exposes forward(x), backward(grad_out) -> grad_in, and parallel
`params`/`grads` lists. float32 is the training default; gradient checks run
the same code at float64. Layers keep per-shape scratch buffers so steady-state
training does not reallocate the big im2col intermediates on every step.
"""

from __future__ import annotations

import threading

import numpy as np


def he_uniform(rng: np.random.Generator, fan_in: int, shape, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, shape).astype(dtype)


class _Scratch:
    """Shape-keyed reusable work arrays, kept per thread so concurrent
    inference on a frozen model stays safe."""

    def __init__(self):
        self._local = threading.local()

    def get(self, name: str, shape, dtype, zero: bool = False) -> np.ndarray:
        bufs = getattr(self._local, "bufs", None)
        if bufs is None:
            bufs = self._local.bufs = {}
        buf = bufs.get(name)
        if buf is None or buf.shape != shape or buf.dtype != dtype:
            buf = np.zeros(shape, dtype=dtype)
            bufs[name] = buf
        elif zero:
            buf[...] = 0
        return buf


class Dense:
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype=np.float32):
        self.w = he_uniform(rng, in_dim, (in_dim, out_dim), dtype)
        self.b = np.zeros(out_dim, dtype=dtype)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x = None
        self._scratch = _Scratch()

    @property
    def params(self):
        return [self.w, self.b]

    @property
    def grads(self):
        return [self.gw, self.gb]

    def forward(self, x):
        self._x = x
        y = self._scratch.get("y", (x.shape[0], self.w.shape[1]), x.dtype)
        np.matmul(x, self.w, out=y)
        y += self.b
        return y

    def backward(self, g):
        np.matmul(self._x.T, g, out=self.gw)
        g.sum(axis=0, out=self.gb)
        dx = self._scratch.get("dx", self._x.shape, g.dtype)
        np.matmul(g, self.w.T, out=dx)
        return dx


class Conv2D:
    """Stride-1 'same' convolution; even kernels pad extra on the bottom/right."""

    def __init__(self, kernel: int, in_ch: int, out_ch: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.kernel = kernel
        self.in_ch = in_ch
        self.out_ch = out_ch
        fan_in = kernel * kernel * in_ch
        self.w = he_uniform(rng, fan_in, (fan_in, out_ch), dtype)
        self.b = np.zeros(out_ch, dtype=dtype)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self.pad_lo = (kernel - 1) // 2
        self.pad_hi = kernel - 1 - self.pad_lo
        self._cols = None
        self._in_shape = None
        self._scratch = _Scratch()

    @property
    def params(self):
        return [self.w, self.b]

    @property
    def grads(self):
        return [self.gw, self.gb]

    def forward(self, x):
        b, h, w, c = x.shape
        if c != self.in_ch:
            raise ValueError(f"expected {self.in_ch} input channels, got {c}")
        self._in_shape = x.shape
        k = self.kernel
        # The padded border is written once (buffers start zeroed) and the
        # interior is overwritten on every call.
        xp = self._scratch.get("xp", (b, h + k - 1, w + k - 1, c), x.dtype)
        xp[:, self.pad_lo:self.pad_lo + h, self.pad_lo:self.pad_lo + w, :] = x
        cols = self._scratch.get("cols", (b, h, w, k * k * c), x.dtype)
        pos = 0
        for di in range(k):
            for dj in range(k):
                cols[:, :, :, pos:pos + c] = xp[:, di:di + h, dj:dj + w, :]
                pos += c
        cols2d = cols.reshape(b * h * w, k * k * c)
        self._cols = cols2d  # read by backward; training is single-threaded
        y = self._scratch.get("y", (b * h * w, self.out_ch), x.dtype)
        np.matmul(cols2d, self.w, out=y)
        y += self.b
        return y.reshape(b, h, w, self.out_ch)

    def backward(self, g):
        b, h, w, _ = self._in_shape
        k, c = self.kernel, self.in_ch
        gm = np.ascontiguousarray(g).reshape(b * h * w, self.out_ch)
        np.matmul(self._cols.T, gm, out=self.gw)
        gm.sum(axis=0, out=self.gb)
        dcols = self._scratch.get("dcols", (b * h * w, k * k * c), g.dtype)
        np.matmul(gm, self.w.T, out=dcols)
        dcols = dcols.reshape(b, h, w, k * k * c)
        dxp = self._scratch.get("dxp", (b, h + k - 1, w + k - 1, c), g.dtype, zero=True)
        pos = 0
        for di in range(k):
            for dj in range(k):
                dxp[:, di:di + h, dj:dj + w, :] += dcols[:, :, :, pos:pos + c]
                pos += c
        lo = self.pad_lo
        return dxp[:, lo:lo + h, lo:lo + w, :]


class ReLU:
    params: list = []
    grads: list = []

    def __init__(self):
        self._mask = None

    def forward(self, x):
        self._mask = x > 0
        return x * self._mask

    def backward(self, g):
        return g * self._mask


class Flatten:
    params: list = []
    grads: list = []

    def __init__(self):
        self._shape = None

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, g):
        return g.reshape(self._shape)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
