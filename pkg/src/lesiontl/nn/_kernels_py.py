"""Pure-numpy implementations of the hot kernels.

Semantics (shapes, window scan order, argmax tie-breaking) match the
compiled extension exactly; only floating-point summation order in the
scatter-accumulate kernels may differ by a few ulp.
"""

import numpy as np
from numpy.lib.stride_tricks import as_strided


def _out_size(size, k, s):
    return (size - k) // s + 1


def im2col(xp, kh, kw, sh, sw):
    """Extract sliding patches from a padded NHWC batch.

    xp: (N, HP, WP, C) contiguous. Returns (N*OH*OW, kh*kw*C) with rows in
    (n, oh, ow) order and columns in (i, j, c) order.
    """
    n, hp, wp, c = xp.shape
    oh = _out_size(hp, kh, sh)
    ow = _out_size(wp, kw, sw)
    sn, shh, sww, sc = xp.strides
    windows = as_strided(
        xp,
        shape=(n, oh, ow, kh, kw, c),
        strides=(sn, shh * sh, sww * sw, shh, sww, sc),
        writeable=False,
    )
    return windows.reshape(n * oh * ow, kh * kw * c)


def col2im(cols, n, hp, wp, c, kh, kw, sh, sw):
    """Scatter-add patch gradients back onto the padded input grid."""
    oh = _out_size(hp, kh, sh)
    ow = _out_size(wp, kw, sw)
    dxp = np.zeros((n, hp, wp, c), dtype=cols.dtype)
    cols6 = cols.reshape(n, oh, ow, kh, kw, c)
    for i in range(kh):
        for j in range(kw):
            dxp[:, i : i + sh * oh : sh, j : j + sw * ow : sw, :] += cols6[:, :, :, i, j, :]
    return dxp


def maxpool_forward(x, kh, kw, sh, sw):
    """Max pooling over NHWC input.

    Returns (out, argmax) where argmax holds the flat spatial index
    (h * W + w) of each window maximum. Ties resolve to the first element
    in row-major window order.
    """
    n, h, w, c = x.shape
    oh = _out_size(h, kh, sh)
    ow = _out_size(w, kw, sw)
    sn, shh, sww, sc = x.strides
    windows = as_strided(
        x,
        shape=(n, oh, ow, kh, kw, c),
        strides=(sn, shh * sh, sww * sw, shh, sww, sc),
        writeable=False,
    )
    flat = windows.reshape(n, oh, ow, kh * kw, c)
    arg = flat.argmax(axis=3)
    out = np.take_along_axis(flat, arg[:, :, :, None, :], axis=3)[:, :, :, 0, :]
    wi, wj = np.divmod(arg, kw)
    hh = (np.arange(oh, dtype=np.int64) * sh)[None, :, None, None] + wi
    ww = (np.arange(ow, dtype=np.int64) * sw)[None, None, :, None] + wj
    return np.ascontiguousarray(out), (hh * w + ww).astype(np.int64)


def maxpool_backward(dout, argmax, h, w):
    """Route pooled gradients back to the argmax positions (overlap-safe)."""
    n, oh, ow, c = dout.shape
    dx = np.zeros((n, h * w, c), dtype=dout.dtype)
    ni = np.broadcast_to(np.arange(n)[:, None, None, None], dout.shape)
    ci = np.broadcast_to(np.arange(c)[None, None, None, :], dout.shape)
    np.add.at(dx, (ni, argmax, ci), dout)
    return dx.reshape(n, h, w, c)
