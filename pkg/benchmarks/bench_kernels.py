"""Benchmark the compiled kernel backend against the numpy fallback.

Times one full cell-integral sweep (the O(N^2) hot loop behind every
operator build) at a few grid sizes and reports the speedup plus the
worst entrywise disagreement between backends.

Run:  python benchmarks/bench_kernels.py [n ...]
"""
import sys
import time

import numpy as np

from jdisc import build_grid
from jdisc.kernels import compiled_cell_integrals, numpy_cell_integrals


def time_sweep(fn, cells, h, evals, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(cells, h, evals, True)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(sizes):
    if compiled_cell_integrals is None:
        print("compiled backend unavailable; nothing to compare")
        return
    print(f"{'n':>5s} {'pairs':>12s} {'numpy [s]':>10s} {'compiled [s]':>12s} "
          f"{'speedup':>8s} {'max diff':>10s}")
    for n in sizes:
        grid = build_grid(n)
        evals = grid.cells[: min(grid.ncells, 2000)]
        t_np, (i1_np, i2_np) = time_sweep(numpy_cell_integrals,
                                          grid.cells, grid.h, evals)
        t_cy, (i1_cy, i2_cy) = time_sweep(compiled_cell_integrals,
                                          grid.cells, grid.h, evals)
        diff = max(np.abs(i1_np - i1_cy).max(), np.abs(i2_np - i2_cy).max())
        print(f"{n:5d} {evals.size * grid.ncells:12d} {t_np:10.3f} "
              f"{t_cy:12.3f} {t_np / t_cy:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main([int(a) for a in sys.argv[1:]] or [16, 32, 64])
