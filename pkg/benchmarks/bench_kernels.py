"""Compiled versus numpy ``rank1_search``.

    python benchmarks/bench_kernels.py [--repeat N] [--budget R]

For each case a planted span of product vectors is searched from the same
random starts by both backends; the table reports the best-of-N wall time
and checks that converged restarts land on the same rays.
"""
import argparse
import sys
import timeit

import numpy as np

from sepfact import _kernels_py
from sepfact.numerics import range_basis
from sepfact.sampling import random_unit_vector, rng_for

try:
    from sepfact import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

CASES = [(2, 2, 2), (3, 3, 3), (3, 4, 4), (4, 4, 4), (4, 6, 6)]


def planted(m, n, k, seed):
    rng = rng_for(seed)
    x = np.column_stack([np.kron(random_unit_vector(rng, m), random_unit_vector(rng, n)) for _ in range(k)])
    return np.ascontiguousarray(range_basis(x))


def agree(a, b, thresh=1e-10) -> bool:
    both = (a[2] < thresh) & (b[2] < thresh)
    return all(abs(np.vdot(np.kron(a[0][i], a[1][i]), np.kron(b[0][i], b[1][i]))) > 1 - 1e-8
               for i in np.flatnonzero(both))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--budget", type=int, default=200)
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; only the numpy backend is available", file=sys.stderr)

    print(f"{'case':>8} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8} {'converged':>10} agree")
    for m, n, k in CASES:
        q = planted(m, n, k, seed=m * 100 + n)
        rng = rng_for(1, m, n)
        starts = rng.standard_normal((args.budget, k)) + 1j * rng.standard_normal((args.budget, k))

        def run(mod):
            return mod.rank1_search(q, m, n, starts, 2000, 1e-13)

        t_py = min(timeit.repeat(lambda: run(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        out_py = run(_kernels_py)
        conv = f"{np.mean(out_py[2] < 1e-10):.0%}"
        if _kernels_c is None:
            print(f"{m}x{n}/{k:<3} {t_py:11.2f} {'-':>12} {'-':>8} {conv:>10} -")
            continue
        t_c = min(timeit.repeat(lambda: run(_kernels_c), number=1, repeat=args.repeat)) * 1e3
        ok = agree(out_py, run(_kernels_c))
        print(f"{m}x{n}/{k:<3} {t_py:11.2f} {t_c:12.2f} {t_py / t_c:7.1f}x {conv:>10} {'yes' if ok else 'NO'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
