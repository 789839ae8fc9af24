#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Shapes mirror the hot layers of the shipped backbones. Both paths share
the BLAS GEMM; what differs is patch extraction/scatter and pooling.

Usage: python benchmarks/bench_kernels.py [--repeats 5] [--dtype float32]
"""

import argparse
import time

import numpy as np

from lesiontl.nn import backend

# (label, n, h, w, c, kh, stride) for conv-patch kernels; pools reuse shapes
CONV_CASES = [
    ("vgg conv1_2 224x224x64 k3", 1, 226, 226, 64, 3, 1),
    ("vgg conv3_1 56x56x128 k3", 2, 58, 58, 128, 3, 1),
    ("vgg conv5_1 14x14x512 k3", 4, 16, 16, 512, 3, 1),
    ("alexnet conv2 27x27x64 k5", 4, 31, 31, 64, 5, 1),
]
POOL_CASES = [
    ("vgg pool1 224x224x64 k2s2", 1, 224, 224, 64, 2, 2),
    ("vgg pool3 56x56x256 k2s2", 2, 56, 56, 256, 2, 2),
    ("alexnet pool1 55x55x64 k3s2", 4, 55, 55, 64, 3, 2),
]


def timeit_group(fns, repeats):
    """Interleaved best-of-N timing: alternating the implementations each
    round keeps allocator/page-cache state fair between them."""
    for fn in fns.values():
        fn()  # warm-up
    best = {name: float("inf") for name in fns}
    for _ in range(repeats):
        for name, fn in fns.items():
            t0 = time.perf_counter()
            fn()
            best[name] = min(best[name], time.perf_counter() - t0)
    return best


def bench(repeats, dtype):
    rng = np.random.default_rng(0)
    try:
        impls = [("cython", backend.get_backend("cython")), ("python", backend.get_backend("python"))]
    except ImportError:
        print("compiled extension unavailable; benchmarking the fallback only")
        impls = [("python", backend.get_backend("python"))]

    rows = []
    for label, n, h, w, c, k, s in CONV_CASES:
        x = np.ascontiguousarray(rng.standard_normal((n, h, w, c)).astype(dtype))
        oh = (h - k) // s + 1
        ow = (w - k) // s + 1
        cols_shape = (n * oh * ow, k * k * c)
        cols = np.ascontiguousarray(rng.standard_normal(cols_shape).astype(dtype))
        rows.append((
            f"im2col  {label}",
            timeit_group({name: (lambda impl=impl: impl.im2col(x, k, k, s, s)) for name, impl in impls}, repeats),
        ))
        rows.append((
            f"col2im  {label}",
            timeit_group(
                {name: (lambda impl=impl: impl.col2im(cols, n, h, w, c, k, k, s, s)) for name, impl in impls},
                repeats,
            ),
        ))
    for label, n, h, w, c, k, s in POOL_CASES:
        x = np.ascontiguousarray(rng.standard_normal((n, h, w, c)).astype(dtype))
        rows.append((
            f"pool fw {label}",
            timeit_group(
                {name: (lambda impl=impl: impl.maxpool_forward(x, k, k, s, s)) for name, impl in impls}, repeats
            ),
        ))
        out, argmax = impls[0][1].maxpool_forward(x, k, k, s, s)
        dout = np.ascontiguousarray(rng.standard_normal(out.shape).astype(dtype))
        rows.append((
            f"pool bw {label}",
            timeit_group(
                {name: (lambda impl=impl: impl.maxpool_backward(dout, argmax, h, w)) for name, impl in impls},
                repeats,
            ),
        ))

    names = [name for name, _ in impls]
    header = f"{'kernel':44s}" + "".join(f"{n:>12s}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    print("-" * len(header))
    for label, times in rows:
        line = f"{label:44s}" + "".join(f"{times[n] * 1e3:10.2f}ms" for n in names)
        if len(names) == 2:
            line += f"{times['python'] / times['cython']:9.2f}x"
        print(line)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--dtype", choices=["float32", "float64"], default="float32")
    args = parser.parse_args()
    bench(args.repeats, np.dtype(args.dtype))


if __name__ == "__main__":
    main()
