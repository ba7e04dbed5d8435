#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times conv1d forward/backward and maxpool on training-shaped tensors and
prints a speedup table. Imports both kernel modules directly, so the
AEROFL_BACKEND env var does not matter here.
"""

import argparse
import time

import numpy as np

from aerofl.nn import kernels_numpy

try:
    from aerofl.nn import kernels_numba
except ImportError:
    kernels_numba = None


def timeit(fn, repeats):
    fn()  # warmup (JIT compile on the numba path)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--batch", type=int, default=32)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if kernels_numba is None:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    B = args.batch
    x1 = rng.normal(size=(B, 14, 50)).astype(np.float32)
    w1 = rng.normal(size=(32, 14, 3)).astype(np.float32)
    b1 = np.zeros(32, np.float32)
    y1 = rng.normal(size=(B, 32, 50)).astype(np.float32)
    h = rng.normal(size=(B, 32, 50)).astype(np.float32)

    cases = {
        "conv1d_forward": lambda k: k.conv1d_forward(x1, w1, b1),
        "conv1d_backward": lambda k: k.conv1d_backward(x1, w1, y1),
        "maxpool2_forward": lambda k: k.maxpool2_forward(h),
    }

    print(f"batch={B}, best of {args.repeats} runs after warmup")
    print(f"{'kernel':<18} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for name, call in cases.items():
        t_np = timeit(lambda: call(kernels_numpy), args.repeats)
        t_nb = timeit(lambda: call(kernels_numba), args.repeats)
        print(f"{name:<18} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} "
              f"{t_np / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
