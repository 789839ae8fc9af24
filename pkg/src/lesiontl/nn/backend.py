"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-numpy module
is the fallback. Set LESIONTL_BACKEND=python or =cython to force a choice
(forcing cython raises if the extension is missing).
"""

import os

from . import _kernels_py

_requested = os.environ.get("LESIONTL_BACKEND", "auto").lower()
if _requested not in ("auto", "cython", "python"):
    raise ValueError(f"LESIONTL_BACKEND must be auto|cython|python, got {_requested!r}")

_impl = None
_name = "python"
if _requested in ("auto", "cython"):
    try:
        from . import _kernels as _impl_compiled

        _impl = _impl_compiled
        _name = "cython"
    except ImportError:
        if _requested == "cython":
            raise
if _impl is None:
    _impl = _kernels_py

im2col = _impl.im2col
col2im = _impl.col2im
maxpool_forward = _impl.maxpool_forward
maxpool_backward = _impl.maxpool_backward


def kernel_backend():
    """Name of the active kernel implementation ('cython' or 'python')."""
    return _name


def get_backend(name):
    """Fetch a specific backend module by name (used by the benchmark)."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
