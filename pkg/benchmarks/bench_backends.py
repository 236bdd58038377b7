"""Throughput comparison of the enumeration kernels.

Runs the full two-pass posterior (scan + accumulate) on a 132-point
grid for increasing m with both the compiled extension and the pure
NumPy fallback, and reports configurations per second.  The python
backend is skipped for the largest m unless --all is given.

Usage: python3 benchmarks/bench_backends.py [--all] [--workers W]
"""
import argparse
import time

import numpy as np

from trendscan import AnalysisGrid, available_backends, posterior


def bench(grid, m, backend, workers):
    t0 = time.perf_counter()
    post = posterior(grid, m, backend=backend, workers=workers,
                     budget=None)
    dt = time.perf_counter() - t0
    return post.count, dt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--all", action="store_true",
                    help="run the python backend at every m (slow)")
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    t = np.arange(132, dtype=float)
    y = 0.3 + 0.002 * t + 0.03 * rng.standard_normal(132)
    grid = AnalysisGrid(times=t, values=y)

    backends = available_backends()
    print(f"backends: {', '.join(backends)}   workers: {args.workers}")
    print(f"{'m':>2} {'configs':>12} " + "".join(
        f"{name + ' (s)':>14}{name + ' cfg/s':>16}" for name in backends))
    for m in (1, 2, 3, 4):
        row = f"{m:>2} "
        count = None
        for name in backends:
            if name == "python" and m >= 4 and not args.all:
                row += f"{'skipped':>14}{'':>16}"
                continue
            count, dt = bench(grid, m, name, args.workers)
            row += f"{dt:>14.2f}{count / dt:>16,.0f}"
        row = f"{m:>2} {count:>12,} " + row[3:]
        print(row)


if __name__ == "__main__":
    main()
