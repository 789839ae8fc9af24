"""Layer and network mechanics: gradients, dropout, softmax, determinism."""

import numpy as np
import pytest

from lesiontl.nn import Conv2D, Dense, Dropout, Flatten, MaxPool2D, Network, ReLU, softmax
from lesiontl.nn import layers as layers_mod
from lesiontl.nn.network import cross_entropy


def numeric_gradients(net, x, y, h=1e-4):
    """Central finite differences of the loss for every trainable parameter."""
    out = {}
    for key, layer, pname in net.parameters(trainable_only=True):
        arr = layer.params[pname]
        grad = np.zeros_like(arr)
        flat = arr.ravel()
        gflat = grad.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lp = cross_entropy(net.logits(x), y)
            flat[i] = orig - h
            lm = cross_entropy(net.logits(x), y)
            flat[i] = orig
            gflat[i] = (lp - lm) / (2 * h)
        out[key] = grad
    return out


def assert_grads_close(net, x, y, tol=1e-4):
    loss, _ = net.loss_and_gradients(x, y, training=False)
    numeric = numeric_gradients(net, x, y)
    for key, layer, pname in net.parameters(trainable_only=True):
        analytic = layer.grads[pname]
        num = numeric[key]
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(num)), 1e-8)
        rel = np.abs(analytic - num) / denom
        assert rel.max() < tol, f"{key}: worst rel err {rel.max():.2e}"


def tiny_net(seed=0, dropout=0.0):
    rng = np.random.default_rng(seed)
    layer_list = [
        Conv2D("conv1", 3, 2, 3, stride=1, pad=1, rng=rng, dtype=np.float64),
        ReLU("relu1"),
        MaxPool2D("pool1", 2, 2),
        Flatten("flatten"),
        Dense("fc1", 4 * 4 * 2, 4, rng=rng, dtype=np.float64),
        ReLU("relu_fc1"),
    ]
    if dropout:
        layer_list.append(Dropout("dropout1", dropout))
    layer_list.append(Dense("output", 4, 2, rng=rng, dtype=np.float64, init="small"))
    return Network(layer_list, (8, 8, 3), dtype=np.float64)


def test_full_network_gradcheck():
    rng = np.random.default_rng(42)
    net = tiny_net(seed=42)
    x = rng.random((5, 8, 8, 3))
    y = rng.integers(0, 2, size=5)
    assert_grads_close(net, x, y)


def test_strided_padded_conv_gradcheck():
    rng = np.random.default_rng(3)
    net = Network(
        [
            Conv2D("conv1", 2, 3, 3, stride=2, pad=2, rng=rng, dtype=np.float64),
            ReLU("relu1"),
            Flatten("flatten"),
            Dense("output", 6 * 6 * 3, 2, rng=rng, dtype=np.float64, init="small"),
        ],
        (9, 9, 2),
        dtype=np.float64,
    )
    x = rng.random((3, 9, 9, 2))
    y = rng.integers(0, 2, size=3)
    assert_grads_close(net, x, y)


def test_overlapping_pool_gradcheck():
    rng = np.random.default_rng(4)
    net = Network(
        [
            Conv2D("conv1", 1, 2, 3, stride=1, pad=1, rng=rng, dtype=np.float64),
            ReLU("relu1"),
            MaxPool2D("pool1", 3, 2),
            Flatten("flatten"),
            Dense("output", 3 * 3 * 2, 2, rng=rng, dtype=np.float64, init="small"),
        ],
        (7, 7, 1),
        dtype=np.float64,
    )
    x = rng.random((4, 7, 7, 1))
    y = rng.integers(0, 2, size=4)
    assert_grads_close(net, x, y)


def test_conv_chunking_is_equivalent(monkeypatch):
    """Forcing single-sample chunks must not change results."""
    rng = np.random.default_rng(5)
    x = rng.random((6, 8, 8, 3)).astype(np.float64)
    y = rng.integers(0, 2, size=6)
    net = tiny_net(seed=9)
    out_full = net.logits(x)
    loss_full, _ = net.loss_and_gradients(x, y)
    grads_full = {k: l.grads[p].copy() for k, l, p in net.parameters()}
    monkeypatch.setattr(layers_mod, "_COL_BUDGET", 1)
    out_chunked = net.logits(x)
    loss_chunked, _ = net.loss_and_gradients(x, y)
    np.testing.assert_allclose(out_full, out_chunked, rtol=1e-12)
    assert loss_full == pytest.approx(loss_chunked, rel=1e-12)
    for k, l, p in net.parameters():
        np.testing.assert_allclose(grads_full[k], l.grads[p], rtol=1e-9, atol=1e-12)


def test_dropout_masks_scale_and_disable():
    rng = np.random.default_rng(0)
    d = Dropout("d", 0.5)
    x = np.ones((4, 10), dtype=np.float32)
    out = d.forward(x, training=True, rng=rng)
    assert set(np.unique(out)).issubset({0.0, 2.0})
    assert np.array_equal(d.forward(x, training=False), x)
    with pytest.raises(ValueError):
        d.forward(x, training=True, rng=None)
    with pytest.raises(ValueError):
        Dropout("bad", 1.0)


def test_dropout_rng_stream_is_deterministic():
    x = np.ones((3, 8), dtype=np.float32)
    d = Dropout("d", 0.4)
    a = d.forward(x, training=True, rng=np.random.default_rng(12))
    b = d.forward(x, training=True, rng=np.random.default_rng(12))
    assert np.array_equal(a, b)


def test_softmax_rows_are_probabilities():
    rng = np.random.default_rng(1)
    z = rng.standard_normal((50, 2)).astype(np.float32) * 30
    p = softmax(z)
    assert np.all(p >= 0) and np.all(p <= 1)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-6)


def test_softmax_is_stable_for_huge_logits():
    z = np.array([[1000.0, -1000.0]], dtype=np.float32)
    p = softmax(z)
    assert np.all(np.isfinite(p))
    np.testing.assert_allclose(p, [[1.0, 0.0]], atol=1e-6)


def test_cross_entropy_matches_manual():
    z = np.array([[0.0, 0.0], [2.0, 0.0]])
    y = np.array([0, 1])
    manual = (np.log(2.0) + (np.log(1 + np.exp(2.0)))) / 2
    assert cross_entropy(z, y) == pytest.approx(manual, rel=1e-12)


def test_repeated_eval_forward_is_bit_identical():
    rng = np.random.default_rng(8)
    net = tiny_net(seed=8, dropout=0.5)
    x = rng.random((4, 8, 8, 3))
    a = net.forward(x, training=False)
    b = net.forward(x, training=False)
    assert np.array_equal(a, b)


def test_network_rejects_duplicate_layer_names():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        Network(
            [Dense("a", 2, 2, rng=rng), Dense("a", 2, 2, rng=rng)],
            (2,),
        )
