"""Compare the numba and pure-numpy betweenness kernels on primal graphs.

    python3 benchmarks/bench_brandes.py [--vars 200 500 1000] [--repeat 3]

The numba kernel is warmed up once first so compile time is not counted.
"""
import argparse
import time

import numpy as np

from permsat.centrality import brandes_betweenness
from permsat.cnf import build_primal_graph
from permsat.generators import random_3cnf


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--vars", type=int, nargs="+", default=[200, 500, 1000, 2000])
    ap.add_argument("--ratio", type=float, default=4.26)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    warm = build_primal_graph(random_3cnf(20, args.ratio, 0))
    brandes_betweenness(warm, use_numba=True)

    print(f"{'vars':>6} {'edges':>8} {'numba s':>9} {'numpy s':>9} {'speedup':>8} {'max diff':>9}")
    for n in args.vars:
        g = build_primal_graph(random_3cnf(n, args.ratio, n))
        edges = sum(len(a) for a in g.adjacency) // 2
        t_nb, a = best_of(lambda: brandes_betweenness(g, use_numba=True), args.repeat)
        t_np, b = best_of(lambda: brandes_betweenness(g, use_numba=False), args.repeat)
        diff = float(np.max(np.abs(a - b)))
        print(f"{n:>6} {edges:>8} {t_nb:>9.4f} {t_np:>9.4f} {t_np / t_nb:>7.1f}x {diff:>9.1e}")


if __name__ == "__main__":
    main()
