"""Time the JIT-compiled kernels against their pure-numpy fallbacks.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Leave ``MSPN_NO_NUMBA`` unset so the compiled path is active; each kernel
is checked for agreement between the two paths on its benchmark workload
before anything is timed. With the fallback forced via the environment
flag, both columns time the same uncompiled functions and the speedup
column reads 1.0x.
"""

import time

import numpy as np

from mspn._kernels import (
    NUMBA_ENABLED,
    _dp_fill_impl,
    _dp_fill_numpy,
    _lloyd_impl,
    _lloyd_numpy,
    _pava_impl,
    dp_fill,
    lloyd,
    pava_nondecreasing,
)


def best_of(fn, *args, repeats: int = 5) -> float:
    """Minimum wall time over several calls (seconds)."""
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_pava(rng):
    values = rng.normal(0.0, 1.0, 200_000) + np.linspace(0.0, 3.0, 200_000)
    weights = rng.uniform(0.5, 2.0, 200_000)
    np.testing.assert_array_equal(
        pava_nondecreasing(values, weights), _pava_impl(values, weights)
    )
    return (
        best_of(pava_nondecreasing, values, weights),
        best_of(_pava_impl, values, weights, repeats=1),
    )


def bench_dp_fill(rng):
    n_bounds = 100
    seg = rng.normal(-5.0, 2.0, (n_bounds, n_bounds))
    f_jit, back_jit = dp_fill(seg)
    f_np, back_np = _dp_fill_numpy(seg)
    np.testing.assert_array_equal(f_jit, f_np)
    np.testing.assert_array_equal(back_jit, back_np)
    return best_of(dp_fill, seg), best_of(_dp_fill_numpy, seg)


def bench_lloyd(rng):
    half = 25_000
    points = np.vstack(
        [rng.normal(0.0, 1.0, (half, 6)), rng.normal(8.0, 1.0, (half, 6))]
    )
    centroids = points[:2].copy()
    labels_jit = lloyd(points, centroids, 100, 1e-4)
    labels_np = _lloyd_numpy(points, centroids, 100, 1e-4)
    np.testing.assert_array_equal(labels_jit, labels_np)
    return (
        best_of(lloyd, points, centroids, 100, 1e-4),
        best_of(_lloyd_numpy, points, centroids, 100, 1e-4),
    )


def main():
    rng = np.random.default_rng(42)
    print(f"numba path active: {NUMBA_ENABLED}")

    if NUMBA_ENABLED:
        # compile outside the timed region
        pava_nondecreasing(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
        dp_fill(np.zeros((2, 2)))
        lloyd(np.zeros((4, 2)), np.zeros((2, 2)), 2, 1e-4)

    rows = [
        ("pava_nondecreasing (n=200000)", *bench_pava(rng)),
        ("dp_fill (100 boundaries)", *bench_dp_fill(rng)),
        ("lloyd (50000x6, k=2)", *bench_lloyd(rng)),
    ]

    width = max(len(name) for name, *_ in rows)
    print(f"{'kernel':<{width}}  {'jit':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, t_jit, t_np in rows:
        print(
            f"{name:<{width}}  {t_jit * 1e3:>8.2f}ms  {t_np * 1e3:>8.2f}ms  "
            f"{t_np / t_jit:>7.1f}x"
        )


if __name__ == "__main__":
    main()
