"""Kernel-level checks: both backends against naive loop oracles and each other."""

import numpy as np
import pytest

from lesiontl.nn import backend


def naive_im2col(xp, kh, kw, sh, sw):
    n, hp, wp, c = xp.shape
    oh = (hp - kh) // sh + 1
    ow = (wp - kw) // sw + 1
    out = np.zeros((n * oh * ow, kh * kw * c), dtype=xp.dtype)
    for b in range(n):
        for i in range(oh):
            for j in range(ow):
                row = (b * oh + i) * ow + j
                patch = xp[b, i * sh : i * sh + kh, j * sw : j * sw + kw, :]
                out[row] = patch.reshape(-1)
    return out


def naive_maxpool(x, kh, kw, sh, sw):
    n, h, w, c = x.shape
    oh = (h - kh) // sh + 1
    ow = (w - kw) // sw + 1
    out = np.zeros((n, oh, ow, c), dtype=x.dtype)
    for b in range(n):
        for i in range(oh):
            for j in range(ow):
                for ch in range(c):
                    out[b, i, j, ch] = x[b, i * sh : i * sh + kh, j * sw : j * sw + kw, ch].max()
    return out


def available_backends():
    names = ["python"]
    try:
        backend.get_backend("cython")
        names.append("cython")
    except ImportError:
        pass
    return names


BACKENDS = available_backends()
SHAPES = [
    # (n, h, w, c, kh, kw, stride, pad)
    (2, 8, 8, 3, 3, 3, 1, 1),
    (1, 11, 7, 2, 3, 3, 2, 0),
    (3, 6, 6, 4, 2, 2, 2, 0),
    (1, 13, 13, 1, 3, 3, 2, 1),
]


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("dtype", [np.float32, np.float64])
@pytest.mark.parametrize("shape", SHAPES)
def test_im2col_matches_naive(name, dtype, shape):
    impl = backend.get_backend(name)
    n, h, w, c, kh, kw, stride, pad = shape
    x = np.random.default_rng(0).standard_normal((n, h, w, c)).astype(dtype)
    xp = np.ascontiguousarray(np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0))))
    got = impl.im2col(xp, kh, kw, stride, stride)
    assert np.array_equal(got, naive_im2col(xp, kh, kw, stride, stride))


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("shape", SHAPES)
def test_col2im_is_adjoint_of_im2col(name, shape):
    """<im2col(x), C> == <x, col2im(C)> for random C: scatter is the exact
    transpose of gather."""
    impl = backend.get_backend(name)
    n, h, w, c, kh, kw, stride, pad = shape
    rng = np.random.default_rng(1)
    x = rng.standard_normal((n, h + 2 * pad, w + 2 * pad, c))
    cols = impl.im2col(np.ascontiguousarray(x), kh, kw, stride, stride)
    cbar = np.ascontiguousarray(rng.standard_normal(cols.shape))
    dx = impl.col2im(cbar, n, h + 2 * pad, w + 2 * pad, c, kh, kw, stride, stride)
    lhs = float(np.sum(cols * cbar))
    rhs = float(np.sum(x * dx))
    assert lhs == pytest.approx(rhs, rel=1e-10)


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_maxpool_forward_matches_naive(name, dtype):
    impl = backend.get_backend(name)
    rng = np.random.default_rng(2)
    for kh, kw, stride in [(2, 2, 2), (3, 3, 2)]:
        x = np.ascontiguousarray(rng.standard_normal((2, 9, 11, 3)).astype(dtype))
        out, argmax = impl.maxpool_forward(x, kh, kw, stride, stride)
        assert np.array_equal(out, naive_maxpool(x, kh, kw, stride, stride))
        # argmax addresses really hold the max value
        flat = x.reshape(2, -1, 3)
        n, oh, ow, c = out.shape
        for b in range(n):
            for i in range(oh):
                for j in range(ow):
                    for ch in range(c):
                        assert flat[b, argmax[b, i, j, ch], ch] == out[b, i, j, ch]


@pytest.mark.parametrize("name", BACKENDS)
def test_maxpool_backward_routes_overlaps(name):
    """Overlapping 3x3 stride-2 windows accumulate gradient at shared argmaxes."""
    impl = backend.get_backend(name)
    x = np.zeros((1, 5, 5, 1), dtype=np.float64)
    x[0, 2, 2, 0] = 10.0  # shared max of all four windows
    out, argmax = impl.maxpool_forward(np.ascontiguousarray(x), 3, 3, 2, 2)
    dout = np.ones_like(out)
    dx = impl.maxpool_backward(dout, argmax, 5, 5)
    assert dx[0, 2, 2, 0] == 4.0
    assert dx.sum() == 4.0


def test_maxpool_tie_break_is_first_in_scan_order():
    for name in BACKENDS:
        impl = backend.get_backend(name)
        x = np.ones((1, 2, 2, 1), dtype=np.float32)
        out, argmax = impl.maxpool_forward(np.ascontiguousarray(x), 2, 2, 2, 2)
        assert argmax[0, 0, 0, 0] == 0


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_backend_parity(dtype):
    py = backend.get_backend("python")
    cy = backend.get_backend("cython")
    rng = np.random.default_rng(3)
    x = np.ascontiguousarray(rng.standard_normal((2, 10, 12, 3)).astype(dtype))
    a = py.im2col(x, 3, 3, 2, 2)
    b = cy.im2col(x, 3, 3, 2, 2)
    assert np.array_equal(a, b)
    cols = np.ascontiguousarray(rng.standard_normal(a.shape).astype(dtype))
    tol = 1e-5 if dtype == np.float32 else 1e-12
    da = py.col2im(cols, 2, 10, 12, 3, 3, 3, 2, 2)
    db = cy.col2im(cols, 2, 10, 12, 3, 3, 3, 2, 2)
    np.testing.assert_allclose(da, db, rtol=tol, atol=tol)
    oa, aa = py.maxpool_forward(x, 3, 3, 2, 2)
    ob, ab = cy.maxpool_forward(x, 3, 3, 2, 2)
    assert np.array_equal(oa, ob)
    assert np.array_equal(aa, ab)
    d = np.ascontiguousarray(rng.standard_normal(oa.shape).astype(dtype))
    np.testing.assert_allclose(
        py.maxpool_backward(d, aa, 10, 12), cy.maxpool_backward(d, ab, 10, 12), rtol=tol, atol=tol
    )
