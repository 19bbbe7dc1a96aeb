"""Compiled vs pure-numpy kernels, and where the summation method spends its time.

Run with ``python benchmarks/bench_kernels.py``.
"""

import argparse
import math
import timeit

import numpy as np

from gkp_transduction import _kernels_py, kernels
from gkp_transduction.channel import ModeSpec, pair_grid
from gkp_transduction.states import default_cutoff, delta_from_nbar


def best_of(fn, repeat=5):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def bench_hermite(sizes):
    print(f"hermite_table (backend in use: {kernels.BACKEND})")
    print(f"{'levels':>7} {'points':>7} {'numpy ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for levels, points in sizes:
        x = np.linspace(-2 * math.sqrt(levels), 2 * math.sqrt(levels), points)
        t_py = best_of(lambda: _kernels_py.hermite_table(levels, x))
        t_c = best_of(lambda: kernels.hermite_table(levels, x))
        print(f"{levels:7d} {points:7d} {1e3 * t_py:10.3f} {1e3 * t_c:12.3f} {t_py / t_c:8.1f}")


def bench_summation(nbars):
    print("\nsummation split: Hermite tables vs the amplitude gemm")
    print(f"{'nbar':>5} {'cutoff':>7} {'pairs':>7} {'tables ms':>10} {'gemm ms':>9}")
    for nbar in nbars:
        cutoff = default_cutoff(delta_from_nbar(nbar))
        window = 2 * math.sqrt(2 * cutoff)
        x, y, w = pair_grid(1 / 3, ModeSpec(2, 1.0, 0, 0.1), ModeSpec(1, 1.0, 0, 0.1), "q", window)
        a = kernels.hermite_table(cutoff, x)
        b = kernels.hermite_table(cutoff, y)
        t_tab = best_of(lambda: (kernels.hermite_table(cutoff, x), kernels.hermite_table(cutoff, y)))
        t_mm = best_of(lambda: (a * w) @ b.T)
        print(f"{nbar:5g} {cutoff:7d} {x.size:7d} {1e3 * t_tab:10.3f} {1e3 * t_mm:9.3f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="small sizes only")
    args = parser.parse_args()
    sizes = [(50, 100), (200, 400)] if args.quick else [(50, 100), (200, 400), (800, 1600), (1600, 3200)]
    nbars = [3, 10] if args.quick else [3, 10, 30, 100]
    bench_hermite(sizes)
    bench_summation(nbars)


if __name__ == "__main__":
    main()
