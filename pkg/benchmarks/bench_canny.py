"""Compare the compiled edge-detection core against the numpy fallback.

Usage: python benchmarks/bench_canny.py [--sizes 256,512,1024] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from shanshui.canny import TAN_22_5, TAN_67_5, gaussian_kernel
from shanshui.canny import _kernels_np as numpy_impl

try:
    from shanshui.canny import _speedups as compiled_impl
except ImportError:
    compiled_impl = None


def run_pipeline(impl, img, weights):
    blurred = np.asarray(impl.gaussian_blur(img, weights))
    gx, gy = (np.asarray(g) for g in impl.sobel_gradients(blurred))
    suppressed = np.asarray(impl.non_max_suppression(gx, gy, TAN_22_5, TAN_67_5))
    return np.asarray(impl.hysteresis_threshold(suppressed, 40.0, 100.0))


def bench(impl, img, weights, repeats):
    run_pipeline(impl, img, weights)  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        run_pipeline(impl, img, weights)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="256,512,1024")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    weights = gaussian_kernel(1.4, 2)
    rng = np.random.default_rng(0)

    print(f"{'size':>6} {'numpy':>12} {'compiled':>12} {'speedup':>9}")
    for size in (int(s) for s in args.sizes.split(",")):
        img = rng.integers(0, 256, size=(size, size)).astype(np.float64)
        t_np = bench(numpy_impl, img, weights, args.repeats)
        if compiled_impl is None:
            print(f"{size:>6} {t_np * 1e3:>10.2f}ms {'(not built)':>12} {'-':>9}")
            continue
        t_cy = bench(compiled_impl, img, weights, args.repeats)
        same = np.array_equal(
            run_pipeline(numpy_impl, img, weights), run_pipeline(compiled_impl, img, weights)
        )
        marker = "" if same else "  !! outputs differ"
        print(
            f"{size:>6} {t_np * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms {t_np / t_cy:>8.1f}x{marker}"
        )


if __name__ == "__main__":
    main()
