"""Compare the numba and numpy batched-curvature kernels.

Run:  python benchmarks/bench_kernels.py [batch_sizes ...]

This is the hot path of the grid flow: every RK4 stage evaluates
curvature at each grid node.  The numba kernel is warmed up before
timing so compilation cost is excluded.
"""

import sys
import time

import numpy as np

from rg2lab.families import BumpyFamily
from rg2lab.kernels import HAS_NUMBA, curvature_batch_numba, curvature_batch_numpy


def make_batch(n: int, count: int, seed: int = 0):
    fam = BumpyFamily(n, eps=0.2, seed=seed)
    rng = np.random.default_rng(seed)
    g = np.empty((count, n, n))
    dg = np.empty((count, n, n, n))
    d2g = np.empty((count,) + (n,) * 4)
    for b in range(count):
        jet = fam.jet(fam.sample_point(rng))
        g[b], dg[b], d2g[b] = jet.g, jet.dg, jet.d2g
    return g, dg, d2g


def time_call(fn, *args, repeats: int = 3) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(batch_sizes):
    print(f"numba available: {HAS_NUMBA}")
    for n in (2, 3):
        for count in batch_sizes:
            g, dg, d2g = make_batch(n, count)
            t_np = time_call(curvature_batch_numpy, g, dg, d2g)
            row = f"n={n} nodes={count:>7d}  numpy {t_np*1e3:9.2f} ms"
            if HAS_NUMBA:
                curvature_batch_numba(g[:1], dg[:1], d2g[:1])  # warm-up/compile
                t_nb = time_call(curvature_batch_numba, g, dg, d2g)
                row += f"  numba {t_nb*1e3:9.2f} ms  speedup {t_np/t_nb:6.2f}x"
                out_a = curvature_batch_numba(g, dg, d2g)
                out_b = curvature_batch_numpy(g, dg, d2g)
                agree = max(np.abs(a - b).max() for a, b in zip(out_a, out_b))
                row += f"  max disagreement {agree:.1e}"
            print(row)


if __name__ == "__main__":
    sizes = [int(a) for a in sys.argv[1:]] or [1024, 16384, 65536]
    main(sizes)
