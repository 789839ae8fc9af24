"""Numerical core: NHWC layers, a sequential network, and the hot kernels.

Kernels come in two interchangeable implementations — a compiled extension
and a pure-numpy fallback — chosen at import in `backend`.
"""

from .backend import kernel_backend
from .layers import Conv2D, Dense, Dropout, Flatten, MaxPool2D, ReLU
from .network import Network, cross_entropy, softmax

__all__ = [
    "Conv2D",
    "Dense",
    "Dropout",
    "Flatten",
    "MaxPool2D",
    "ReLU",
    "Network",
    "cross_entropy",
    "softmax",
    "kernel_backend",
]
