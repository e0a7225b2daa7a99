"""Benchmark the compiled split kernel against the pure-Python fallback.

Times scan_thresholds on sorted synthetic data for both criteria and a
range of node sizes, and checks that the two backends choose identical
split indices.

Run:  python3 benchmarks/bench_split.py
"""

import time

import numpy as np

from betaforest.kernels import CRIT_BETA, CRIT_MSE, get_backend

SIZES = (100, 500, 2_000, 10_000)
REPEATS = 30
PHI_BOUNDS = (1e-4, 1e6)


def make_node(n, rng):
    xs = np.sort(rng.normal(size=n))
    ys = rng.uniform(0.01, 0.99, n)
    return xs, ys


def time_backend(mod, xs, ys, criterion):
    parent = mod.group_score(
        ys.size,
        float(ys.sum()),
        float(ys @ ys),
        float(np.log(ys).sum()),
        float(np.log1p(-ys).sum()),
        criterion,
        *PHI_BOUNDS,
    )
    best = None
    start = time.perf_counter()
    for _ in range(REPEATS):
        best = mod.scan_thresholds(xs, ys, parent, criterion, 2, *PHI_BOUNDS)
    elapsed = (time.perf_counter() - start) / REPEATS
    return elapsed, best


def main():
    try:
        cy = get_backend("cython")
    except ImportError:
        print("compiled backend not available; build the package first")
        return
    py = get_backend("python")
    rng = np.random.default_rng(0)
    print(f"{'criterion':<10} {'n':>7} {'python (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for criterion, name in ((CRIT_BETA, "beta"), (CRIT_MSE, "mse")):
        for n in SIZES:
            xs, ys = make_node(n, rng)
            t_py, best_py = time_backend(py, xs, ys, criterion)
            t_cy, best_cy = time_backend(cy, xs, ys, criterion)
            assert best_py[0] == best_cy[0], "backends disagree on the split index"
            print(
                f"{name:<10} {n:>7} {t_py * 1e3:>12.3f} {t_cy * 1e3:>12.3f} "
                f"{t_py / t_cy:>7.1f}x"
            )


if __name__ == "__main__":
    main()
