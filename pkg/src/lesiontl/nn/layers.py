"""Layer primitives for the NHWC training engine.

Forward passes cache whatever the matching backward needs. Convolution
re-extracts patches during backward instead of caching them; that caps peak
memory at one patch buffer per chunk of samples, which matters for the
224x224 backbones on desk-scale machines.
"""

import numpy as np

from . import backend

# patch-buffer budget per convolution chunk, in array elements
_COL_BUDGET = 16 * 1024 * 1024


class Layer:
    kind = "layer"

    def __init__(self, name):
        self.name = name
        self.trainable = True
        self.params = {}
        self.grads = {}

    def forward(self, x, training=False, rng=None):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError

    def out_shape(self, in_shape):
        raise NotImplementedError

    @property
    def param_count(self):
        return sum(p.size for p in self.params.values())

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"


def _standard_normal(rng, shape, dtype):
    dtype = np.dtype(dtype)
    if dtype == np.float32:
        return rng.standard_normal(shape, dtype=np.float32)
    return rng.standard_normal(shape).astype(dtype)


def he_normal(rng, shape, fan_in, dtype):
    scale = np.dtype(dtype).type(np.sqrt(2.0 / fan_in))
    return _standard_normal(rng, shape, dtype) * scale


def small_normal(rng, shape, fan_in, dtype):
    """Near-zero init for the output layer: keeps untrained logits ~0."""
    scale = np.dtype(dtype).type(0.01 / np.sqrt(fan_in))
    return _standard_normal(rng, shape, dtype) * scale


class Conv2D(Layer):
    kind = "conv"

    def __init__(self, name, c_in, c_out, kernel, stride=1, pad=0, rng=None, dtype=np.float32):
        super().__init__(name)
        kh, kw = (kernel, kernel) if isinstance(kernel, int) else kernel
        self.kh, self.kw = kh, kw
        self.stride = stride
        self.pad = pad
        self.c_in, self.c_out = c_in, c_out
        rng = rng or np.random.default_rng(0)
        self.params = {
            "W": he_normal(rng, (kh, kw, c_in, c_out), kh * kw * c_in, dtype),
            "b": np.zeros(c_out, dtype=dtype),
        }
        self._x = None

    def out_shape(self, in_shape):
        h, w, _ = in_shape
        oh = (h + 2 * self.pad - self.kh) // self.stride + 1
        ow = (w + 2 * self.pad - self.kw) // self.stride + 1
        return (oh, ow, self.c_out)

    def _chunk(self, oh, ow):
        per_sample = oh * ow * self.kh * self.kw * self.c_in
        return max(1, _COL_BUDGET // max(1, per_sample))

    def _padded(self, x):
        if self.pad == 0:
            return np.ascontiguousarray(x)
        p = self.pad
        return np.pad(x, ((0, 0), (p, p), (p, p), (0, 0)))

    def forward(self, x, training=False, rng=None):
        n = x.shape[0]
        oh, ow, _ = self.out_shape(x.shape[1:])
        w_mat = self.params["W"].reshape(-1, self.c_out)
        out = np.empty((n, oh, ow, self.c_out), dtype=x.dtype)
        step = self._chunk(oh, ow)
        for n0 in range(0, n, step):
            xp = self._padded(x[n0 : n0 + step])
            cols = backend.im2col(xp, self.kh, self.kw, self.stride, self.stride)
            out[n0 : n0 + step] = (cols @ w_mat + self.params["b"]).reshape(-1, oh, ow, self.c_out)
        self._x = x
        return out

    def backward(self, dout):
        x = self._x
        n, h, w, _ = x.shape
        oh, ow, _ = dout.shape[1:]
        hp, wp = h + 2 * self.pad, w + 2 * self.pad
        w_mat = self.params["W"].reshape(-1, self.c_out)
        d_w = np.zeros_like(w_mat)
        d_b = np.zeros_like(self.params["b"])
        dx = np.empty_like(x)
        step = self._chunk(oh, ow)
        for n0 in range(0, n, step):
            xp = self._padded(x[n0 : n0 + step])
            cols = backend.im2col(xp, self.kh, self.kw, self.stride, self.stride)
            dm = dout[n0 : n0 + step].reshape(-1, self.c_out)
            d_w += cols.T @ dm
            d_b += dm.sum(axis=0)
            dcols = np.ascontiguousarray(dm @ w_mat.T)
            dxp = backend.col2im(
                dcols, xp.shape[0], hp, wp, self.c_in, self.kh, self.kw, self.stride, self.stride
            )
            if self.pad:
                p = self.pad
                dx[n0 : n0 + step] = dxp[:, p : p + h, p : p + w, :]
            else:
                dx[n0 : n0 + step] = dxp
        self.grads = {"W": d_w.reshape(self.params["W"].shape), "b": d_b}
        self._x = None
        return dx


class MaxPool2D(Layer):
    kind = "maxpool"

    def __init__(self, name, kernel, stride):
        super().__init__(name)
        kh, kw = (kernel, kernel) if isinstance(kernel, int) else kernel
        self.kh, self.kw = kh, kw
        self.stride = stride
        self._argmax = None
        self._in_hw = None

    def out_shape(self, in_shape):
        h, w, c = in_shape
        oh = (h - self.kh) // self.stride + 1
        ow = (w - self.kw) // self.stride + 1
        return (oh, ow, c)

    def forward(self, x, training=False, rng=None):
        out, argmax = backend.maxpool_forward(
            np.ascontiguousarray(x), self.kh, self.kw, self.stride, self.stride
        )
        self._argmax = argmax
        self._in_hw = x.shape[1:3]
        return out

    def backward(self, dout):
        h, w = self._in_hw
        dx = backend.maxpool_backward(np.ascontiguousarray(dout), self._argmax, h, w)
        self._argmax = None
        return dx


class ReLU(Layer):
    kind = "relu"

    def __init__(self, name):
        super().__init__(name)
        self._mask = None

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, training=False, rng=None):
        self._mask = x > 0
        return np.where(self._mask, x, x.dtype.type(0))

    def backward(self, dout):
        dx = np.where(self._mask, dout, dout.dtype.type(0))
        self._mask = None
        return dx


class Flatten(Layer):
    kind = "flatten"

    def __init__(self, name="flatten"):
        super().__init__(name)
        self._shape = None

    def out_shape(self, in_shape):
        n = 1
        for d in in_shape:
            n *= d
        return (n,)

    def forward(self, x, training=False, rng=None):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


class Dense(Layer):
    kind = "dense"

    def __init__(self, name, n_in, n_out, rng=None, dtype=np.float32, init="he"):
        super().__init__(name)
        self.n_in, self.n_out = n_in, n_out
        rng = rng or np.random.default_rng(0)
        init_fn = he_normal if init == "he" else small_normal
        self.params = {
            "W": init_fn(rng, (n_in, n_out), n_in, dtype),
            "b": np.zeros(n_out, dtype=dtype),
        }
        self._x = None

    def out_shape(self, in_shape):
        return (self.n_out,)

    def forward(self, x, training=False, rng=None):
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dout):
        self.grads = {"W": self._x.T @ dout, "b": dout.sum(axis=0)}
        dx = dout @ self.params["W"].T
        self._x = None
        return dx


class Dropout(Layer):
    kind = "dropout"

    def __init__(self, name, rate):
        super().__init__(name)
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self._mask = None

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, training=False, rng=None):
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("dropout in training mode needs an rng")
        keep = x.dtype.type(1.0 - self.rate)
        self._mask = (rng.random(x.shape) >= self.rate).astype(x.dtype) / keep
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        dx = dout * self._mask
        self._mask = None
        return dx
