#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel on a representative workload with both backends and
prints a speedup table. Numba compilation happens in a warm-up pass, so
the timings measure steady-state throughput.

    python3 benchmarks/bench_kernels.py [--size 128] [--repeat 5]
"""

import argparse
import time

import numpy as np

from lumen.kernels import _numpy_impl as knp

try:
    from lumen.kernels import _numba_impl as knb
except ImportError:
    knb = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def grid_laplacian_csr(n):
    """5-point Laplacian plus identity on an n x n grid."""
    size = n * n
    rows, cols, vals = [], [], []
    for y in range(n):
        for x in range(n):
            p = y * n + x
            deg = 0
            for q in (p - n, p + n, p - 1, p + 1):
                if q == p - 1 and x == 0:
                    continue
                if q == p + 1 and x == n - 1:
                    continue
                if 0 <= q < size:
                    rows.append(p)
                    cols.append(q)
                    vals.append(-1.0)
                    deg += 1
            rows.append(p)
            cols.append(p)
            vals.append(deg + 1.0)
    order = np.lexsort((cols, rows))
    rows = np.asarray(rows, dtype=np.int64)[order]
    cols = np.asarray(cols, dtype=np.int64)[order]
    vals = np.asarray(vals)[order]
    offsets = np.zeros(size + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=size), out=offsets[1:])
    return offsets, cols, vals


def bench(size, repeat):
    rng = np.random.default_rng(0)
    cases = []

    offsets, cols, vals = grid_laplacian_csr(size)
    x = rng.random(size * size)
    cases.append(("spmv", lambda impl: impl.spmv(offsets, cols, vals, x)))

    b = rng.random(size * size)
    x0 = np.zeros(size * size)
    tol = 1e-10 * np.linalg.norm(b)
    cases.append(
        ("cg_solve", lambda impl: impl.cg_sweep(offsets, cols, vals, b, x0, tol, 10_000))
    )
    cases.append(
        (
            "bicgstab_solve",
            lambda impl: impl.bicgstab_sweep(offsets, cols, vals, b, x0, tol, 10_000),
        )
    )

    img = rng.random((size, size, 3))
    img[size // 4 : -size // 4, size // 4 : -size // 4] = 0.5  # growable plateau
    cases.append(
        ("flood_fill", lambda impl: impl.grow_from_seed(img, size // 2, size // 2, 0.05))
    )

    unknown = np.zeros((size, size), dtype=bool)
    unknown[size // 2 : size // 2 + 8, size // 2 : size // 2 + 8] = True
    known = (~unknown).astype(np.uint8)
    half = 4
    ps = 2 * half + 1
    integral = np.zeros((size + 1, size + 1), dtype=np.int64)
    integral[1:, 1:] = unknown.astype(np.int64).cumsum(0).cumsum(1)
    cnt = (
        integral[ps:, ps:] - integral[:-ps, ps:] - integral[ps:, :-ps] + integral[:-ps, :-ps]
    )
    valid = np.zeros((size, size), dtype=np.uint8)
    valid[half : size - half, half : size - half] = cnt == 0
    ty = tx = size // 2
    cases.append(
        (
            "patch_search",
            lambda impl: impl.best_source_patch(
                img, known, valid, ty, tx, half, half, size - 1 - half, half, size - 1 - half
            ),
        )
    )

    rowbytes = size * 3
    raw = rng.integers(0, 256, (size, 1 + rowbytes)).astype(np.uint8)
    raw[:, 0] = rng.integers(0, 5, size)
    cases.append(("png_unfilter", lambda impl: impl.unfilter_scanlines(raw, 3)))

    print(f"workload: {size}x{size} grid, best of {repeat}")
    print(f"{'kernel':<16} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, fn in cases:
        t_np = timeit(lambda: fn(knp), repeat)
        if knb is None:
            print(f"{name:<16} {t_np * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")
            continue
        fn(knb)  # compile
        t_nb = timeit(lambda: fn(knb), repeat)
        print(
            f"{name:<16} {t_np * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
            f"{t_np / t_nb:>8.1f}x"
        )


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    bench(args.size, args.repeat)
