"""Sequential network container: forward, softmax head, loss, backprop.

The final softmax lives here rather than in the layer list; layers produce
logits and `forward` normalizes them. Loss values are computed in float64
via log-sum-exp regardless of the parameter dtype.
"""

import numpy as np


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits, labels):
    """Mean categorical cross-entropy of integer labels, in float64."""
    z = logits.astype(np.float64)
    m = z.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(z - m).sum(axis=1))
    return float(np.mean(lse - z[np.arange(z.shape[0]), labels]))


class Network:
    """An ordered stack of layers ending in an implicit softmax."""

    def __init__(self, layers, input_shape, dtype=np.float32):
        names = [l.name for l in layers]
        if len(set(names)) != len(names):
            raise ValueError("layer names must be unique")
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        self.dtype = np.dtype(dtype)
        # set by the model factory: names of the backbone's weight-bearing
        # layers, in forward order (freeze policies are validated against it)
        self.backbone_param_layers = tuple(l.name for l in layers if l.params)

    # ---- shape bookkeeping -------------------------------------------------

    def shapes(self):
        """Per-layer output shapes: list of (layer, out_shape)."""
        shape = self.input_shape
        out = []
        for layer in self.layers:
            shape = layer.out_shape(shape)
            out.append((layer, shape))
        return out

    def weight_bearing(self):
        return [l for l in self.layers if l.params]

    # ---- inference ---------------------------------------------------------

    def logits(self, x, training=False, rng=None):
        h = np.ascontiguousarray(x, dtype=self.dtype)
        for layer in self.layers:
            h = layer.forward(h, training=training, rng=rng)
        return h

    def forward(self, x, training=False, rng=None):
        """Per-class probability rows (softmax over the final logits)."""
        return softmax(self.logits(x, training=training, rng=rng))

    # ---- training ----------------------------------------------------------

    def loss_and_gradients(self, x, labels, rng=None, training=True):
        """Run forward+backward; leaves gradients on each layer.

        Returns (loss, n_correct). Predicted class is the argmax of the
        probability row; exact ties resolve to the lowest class index.
        """
        z = self.logits(x, training=training, rng=rng)
        loss = cross_entropy(z, labels)
        p = softmax(z)
        n = z.shape[0]
        dz = p.copy()
        dz[np.arange(n), labels] -= 1.0
        dz = (dz / n).astype(self.dtype)
        grad = dz
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        correct = int(np.sum(p.argmax(axis=1) == labels))
        return loss, correct

    # ---- parameters and snapshots -------------------------------------------

    def parameters(self, trainable_only=False):
        """Ordered (key, layer, param_name) triples."""
        out = []
        for layer in self.layers:
            if trainable_only and not layer.trainable:
                continue
            for pname in layer.params:
                out.append((f"{layer.name}.{pname}", layer, pname))
        return out

    def get_layer(self, name):
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(name)

    def snapshot(self):
        return {key: layer.params[pname].copy() for key, layer, pname in self.parameters()}

    def load_snapshot(self, snap):
        for key, layer, pname in self.parameters():
            layer.params[pname] = snap[key].copy()
