"""Time the numba and numpy kernel backends on falsifier-sized batches.

Usage::

    python benchmarks/bench_kernels.py [--batch 4096] [--n 4] [--repeat 5]

Each kernel is run once per backend before timing, so numba compilation
is excluded.  Reports the best of ``--repeat`` runs and the speedup.
"""

import argparse
import time

import numpy as np

from nnpres import _kernels
from nnpres.funcspec import Named, Polynomial, Sum


def cases(batch, n, rng):
    f = Sum([(1.0, Polynomial([1, 1, 0.5, -2 / 3, 0.25])), (0.5, Named("exp"))])
    poly, named = f.dense
    a = rng.uniform(0, 1, (batch, n, n))
    s = a + np.transpose(a, (0, 2, 1))
    t = np.triu(a)
    nodes = np.sort(rng.uniform(0, 3, (batch, n)), axis=1)
    rows = a[:, 0, :]
    eig = _kernels.jacobi_eigvals(s)
    return {
        "taylor": lambda: _kernels.taylor(poly, named, a),
        "jacobi_eigvals": lambda: _kernels.jacobi_eigvals(s),
        "newton": lambda: _kernels.newton(poly, named, s, eig),
        "triangular_explicit": lambda: _kernels.triangular_explicit(poly, named, t),
        "divdiff_prefix": lambda: _kernels.divdiff_prefix(poly, named, nodes),
        "circulant_rows": lambda: _kernels.circulant_rows(poly, named, rows),
    }


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=4096)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = ["numpy"] + (["numba"] if _kernels._HAVE_NUMBA else [])
    prev = _kernels.backend()
    results = {}
    for name in backends:
        _kernels.set_backend(name)
        rng = np.random.default_rng(0)
        for kernel, fn in cases(args.batch, args.n, rng).items():
            results[kernel, name] = best_of(fn, args.repeat)
    _kernels.set_backend(prev)

    print(f"batch={args.batch} n={args.n} (best of {args.repeat})")
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends) + "     speedup")
    for kernel in cases(1, args.n, np.random.default_rng(0)):
        row = [results[kernel, b] for b in backends]
        line = f"{kernel:<22}" + "".join(f"{1e3 * v:>10.2f}ms" for v in row)
        if len(row) == 2:
            line += f"  {row[0] / row[1]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
