# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: patch extraction/scatter and max pooling.

Mirrors _kernels_py exactly; see that module for the layout contracts.
"""

import numpy as np

cimport cython
from libc.string cimport memcpy

ctypedef fused floating:
    float
    double


def im2col(floating[:, :, :, ::1] xp, Py_ssize_t kh, Py_ssize_t kw,
           Py_ssize_t sh, Py_ssize_t sw):
    cdef Py_ssize_t n = xp.shape[0], hp = xp.shape[1], wp = xp.shape[2], c = xp.shape[3]
    cdef Py_ssize_t oh = (hp - kh) // sh + 1
    cdef Py_ssize_t ow = (wp - kw) // sw + 1
    dtype = np.float32 if floating is float else np.float64
    out_arr = np.empty((n * oh * ow, kh * kw * c), dtype=dtype)
    cdef floating[:, ::1] out = out_arr
    cdef Py_ssize_t span = kw * c
    cdef Py_ssize_t b, i, j, ki, row, h0, w0
    cdef Py_ssize_t ohw = oh * ow
    with nogil:
        for b in range(n):
            for i in range(oh):
                h0 = i * sh
                for j in range(ow):
                    w0 = j * sw
                    row = b * ohw + i * ow + j
                    # each kernel row is a contiguous (kw * c) span in NHWC
                    for ki in range(kh):
                        memcpy(&out[row, ki * span],
                               &xp[b, h0 + ki, w0, 0],
                               span * sizeof(floating))
    return out_arr


def col2im(floating[:, ::1] cols, Py_ssize_t n, Py_ssize_t hp, Py_ssize_t wp,
           Py_ssize_t c, Py_ssize_t kh, Py_ssize_t kw, Py_ssize_t sh, Py_ssize_t sw):
    cdef Py_ssize_t oh = (hp - kh) // sh + 1
    cdef Py_ssize_t ow = (wp - kw) // sw + 1
    dtype = np.float32 if floating is float else np.float64
    dxp_arr = np.zeros((n, hp, wp, c), dtype=dtype)
    cdef floating[:, :, :, ::1] dxp = dxp_arr
    cdef Py_ssize_t b, i, j, ki, kj, ch, row, col, h0, w0
    cdef Py_ssize_t ohw = oh * ow
    with nogil:
        for b in range(n):
            for i in range(oh):
                h0 = i * sh
                for j in range(ow):
                    w0 = j * sw
                    row = b * ohw + i * ow + j
                    col = 0
                    for ki in range(kh):
                        for kj in range(kw):
                            for ch in range(c):
                                dxp[b, h0 + ki, w0 + kj, ch] += cols[row, col]
                                col += 1
    return dxp_arr


def maxpool_forward(floating[:, :, :, ::1] x, Py_ssize_t kh, Py_ssize_t kw,
                    Py_ssize_t sh, Py_ssize_t sw):
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], w = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t oh = (h - kh) // sh + 1
    cdef Py_ssize_t ow = (w - kw) // sw + 1
    dtype = np.float32 if floating is float else np.float64
    out_arr = np.empty((n, oh, ow, c), dtype=dtype)
    arg_arr = np.empty((n, oh, ow, c), dtype=np.int64)
    cdef floating[:, :, :, ::1] out = out_arr
    cdef long long[:, :, :, ::1] arg = arg_arr
    cdef Py_ssize_t b, i, j, ki, kj, ch, h0, w0
    cdef floating best, v
    cdef Py_ssize_t besti
    with nogil:
        for b in range(n):
            for i in range(oh):
                h0 = i * sh
                for j in range(ow):
                    w0 = j * sw
                    for ch in range(c):
                        best = x[b, h0, w0, ch]
                        besti = h0 * w + w0
                        for ki in range(kh):
                            for kj in range(kw):
                                v = x[b, h0 + ki, w0 + kj, ch]
                                if v > best:
                                    best = v
                                    besti = (h0 + ki) * w + (w0 + kj)
                        out[b, i, j, ch] = best
                        arg[b, i, j, ch] = besti
    return out_arr, arg_arr


def maxpool_backward(floating[:, :, :, ::1] dout, long long[:, :, :, ::1] argmax,
                     Py_ssize_t h, Py_ssize_t w):
    cdef Py_ssize_t n = dout.shape[0], oh = dout.shape[1], ow = dout.shape[2], c = dout.shape[3]
    dtype = np.float32 if floating is float else np.float64
    dx_arr = np.zeros((n, h * w, c), dtype=dtype)
    cdef floating[:, :, ::1] dx = dx_arr
    cdef Py_ssize_t b, i, j, ch
    with nogil:
        for b in range(n):
            for i in range(oh):
                for j in range(ow):
                    for ch in range(c):
                        dx[b, argmax[b, i, j, ch], ch] += dout[b, i, j, ch]
    return dx_arr.reshape(n, h, w, c)
