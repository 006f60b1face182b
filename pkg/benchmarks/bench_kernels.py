"""Benchmark the compiled Sylvester kernel against the pure-Python fallback.

Runs the Lyapunov-style solve (transposed left factor) on real Schur
factors of random stable matrices at a range of sizes and prints one table
row per size with the speedup.  Usage::

    python benchmarks/bench_kernels.py [--sizes 50 100 200 400] [--repeats 3]
"""

import argparse
import time

import numpy as np
import scipy.linalg as sla

from pencilph._kernels import available_backends


def _schur_factor(n, rng):
    a = rng.standard_normal((n, n)) - 1.5 * np.eye(n)
    return sla.schur(a, output="real")[0]


def bench(sizes, repeats):
    backends = available_backends()
    if "compiled" not in backends:
        print("compiled backend unavailable; build the extension first "
              "(pip install -e . --no-build-isolation)")
    rng = np.random.default_rng(2024)
    header = f"{'n':>6} | " + " | ".join(f"{name:>12}" for name in backends) \
        + " | speedup"
    print(header)
    print("-" * len(header))
    for n in sizes:
        ta = _schur_factor(n, rng)
        tb = _schur_factor(n, rng)
        c = rng.standard_normal((n, n))
        times = {}
        results = {}
        for name, solver in backends.items():
            best = np.inf
            for _ in range(repeats):
                start = time.perf_counter()
                x = solver(ta, tb, c, transa=True, transb=False, sign=1)
                best = min(best, time.perf_counter() - start)
            times[name] = best
            results[name] = x
        if len(results) == 2:
            diff = np.linalg.norm(results["python"] - results["compiled"])
            scale = 1.0 + np.linalg.norm(results["python"])
            assert diff <= 1e-10 * scale, f"backend mismatch at n={n}: {diff:.3e}"
        cols = " | ".join(f"{times[name] * 1e3:9.2f} ms" for name in backends)
        speed = (f"{times['python'] / times['compiled']:7.1f}x"
                 if len(times) == 2 else "    n/a")
        print(f"{n:>6} | {cols} | {speed}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[25, 50, 100, 200, 400])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    bench(args.sizes, args.repeats)


if __name__ == "__main__":
    main()
