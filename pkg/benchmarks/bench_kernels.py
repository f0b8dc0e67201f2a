"""Benchmark the compiled kernels against the pure-numpy fallback.

Run as: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from lgpairs import _kernels_py

try:
    from lgpairs import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run_case(label, make_call):
    t_py = best_of(make_call(_kernels_py))
    if _kernels is None:
        print(f"{label:38s} python {t_py*1e3:8.2f} ms   compiled: unavailable")
        return
    t_c = best_of(make_call(_kernels))
    a = make_call(_kernels_py)()
    b = make_call(_kernels)()
    worst = np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))
    print(
        f"{label:38s} python {t_py*1e3:8.2f} ms   compiled {t_c*1e3:8.2f} ms"
        f"   speedup {t_py/t_c:5.2f}x   max rel dev {worst:.2e}"
    )


def main():
    rng = np.random.default_rng(7)
    r_small = np.sort(rng.uniform(1.0, 15000.0, 2000))
    r_large = np.sort(rng.uniform(1.0, 22000.0, 8000))
    x = np.sort(rng.uniform(0.0, 120.0, 8000))

    cases = [
        ("laguerre_batch n=60  on 8000 pts", lambda k: lambda: k.laguerre_batch(60, 3.0, x)),
        ("lg_radial_basis p<=60  2000 radii", lambda k: lambda: k.lg_radial_basis(60, 2, 500.0, r_small)),
        ("lg_radial_basis p<=200 2000 radii", lambda k: lambda: k.lg_radial_basis(200, 0, 500.0, r_small)),
        ("lg_radial_basis p<=200 8000 radii", lambda k: lambda: k.lg_radial_basis(200, 5, 1000.0, r_large)),
    ]
    print("kernel benchmark (best of 5)")
    for label, make_call in cases:
        run_case(label, make_call)


if __name__ == "__main__":
    main()
