"""Compiled vs pure-numpy kernel timings.

    python3 benchmarks/bench_kernels.py [--size 256] [--repeat 5]

Each kernel runs once to warm the JIT, then ``--repeat`` times per path;
the best wall time is reported.  The flow estimator row swaps the
dispatch flag in-process, the same switch ``HYBRIDLF_PURE_NUMPY`` sets.
"""

import argparse
import time

import numpy as np
from scipy import ndimage

from hybridlf import kernels
from hybridlf.flow import flow_estimate


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, rng):
    img = rng.random((n, n, 3))
    dx = rng.uniform(-3, 3, (n, n))
    dy = rng.uniform(-3, 3, (n, n))
    co = [rng.random((n, n)) for _ in range(5)]
    a11, a22 = co[0] + 1.0, co[1] + 1.0
    a12 = 0.1 * co[2]
    wx, wy = rng.random((n, n)), rng.random((n, n))
    left = ndimage.gaussian_filter(rng.random((n, n)), 1.5)[:, :, None]
    right = np.roll(left, 6, axis=1)

    def sor(impl):
        return lambda: impl(np.zeros((n, n)), np.zeros((n, n)), a11, a12, a22, co[3], co[4], wx, wy, 30, 1.8)

    return [
        ("bilinear_sample", lambda: kernels.bilinear_sample_nb(img, dx, dy),
         lambda: kernels.bilinear_sample_np(img, dx, dy)),
        ("sor_sweeps x30", sor(kernels.sor_sweeps_nb), sor(kernels.sor_sweeps_np)),
        ("sad_disparity d<=16", lambda: kernels.sad_disparity_nb(left, right, 16, 2),
         lambda: kernels.sad_disparity_np(left, right, 16, 2)),
    ]


def flow_row(n, rng, repeat):
    src = ndimage.gaussian_filter(rng.random((n, n)), 2.0)[:, :, None]
    dst = ndimage.shift(src[:, :, 0], (1.0, 2.5), order=3, mode="reflect")[:, :, None]
    saved = kernels.USE_NUMBA
    try:
        kernels.USE_NUMBA = True
        t_nb = best_of(lambda: flow_estimate(src, dst), repeat)
        kernels.USE_NUMBA = False
        t_np = best_of(lambda: flow_estimate(src, dst), repeat)
    finally:
        kernels.USE_NUMBA = saved
    return t_nb, t_np


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<24}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    rows = [(name, best_of(nb, args.repeat), best_of(npy, args.repeat)) for name, nb, npy in cases(args.size, rng)]
    rows.append(("flow_estimate",) + flow_row(args.size, rng, max(1, args.repeat // 2)))
    for name, t_nb, t_np in rows:
        print(f"{name:<24}{t_nb * 1e3:>12.2f}{t_np * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
