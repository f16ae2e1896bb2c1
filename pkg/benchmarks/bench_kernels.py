#!/usr/bin/env python3
"""Time each hot kernel under the compiled and the pure-Python backend.

    python benchmarks/bench_kernels.py [--sizes 1000,10000] [--repeat 3] [--out csv|json]

Each row reports the best of ``--repeat`` runs and checks that both
backends return the same result.
"""
import argparse
import json
import math
import sys
import time

import numpy as np

from lacpair import _kernels_py, kernels
from lacpair.diophantine import CountParams, count_s_fast
from lacpair.paircorr import GAUSS_CUT
from lacpair.precision import theta_table
from lacpair.sequences import LacunarySequence


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def cases(sizes):
    seq = LacunarySequence.geometric("3/2")
    rng = np.random.default_rng(0)
    for n in sizes:
        # dilated tables for small n; above that the kernels see seeded uniform points,
        # since building a 10^5-point table costs more than the kernels themselves
        th = np.array(theta_table("1.2345", seq, n)) if n <= 10000 else rng.random(n)
        h = 0.5 / n
        yield ("count_pairs_sorted", n, lambda m, th=th, h=h: int(m.count_pairs_sorted(th, h)))
        if n <= 4000:
            yield ("count_pairs_direct", n, lambda m, th=th, h=h: int(m.count_pairs_direct(th, h)))
        s = np.sort(th)
        yield ("smooth_sum_triangle", n, lambda m, s=s, n=n: float(m.smooth_sum_sorted(s, n, 1, 1.0, 1.0)))
        yield ("smooth_sum_gaussian", n,
               lambda m, s=s, n=n: float(m.smooth_sum_sorted(s, n, 2, 0.5, 0.5 * GAUSS_CUT)))
    for N in (40, 80):
        p = CountParams.from_epsilon(N, "0.2")
        yield ("count_s_fast", N, lambda m, p=p: count_s_fast(seq, p, impl=m).count)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,10000,100000")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--out", choices=("csv", "json"), default="csv")
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]
    impls = kernels.backends()
    if "cython" not in impls:
        print("compiled core not built; timing the Python backend only", file=sys.stderr)
    rows = []
    for name, n, fn in cases(sizes):
        res = {b: best_of(lambda: fn(m), args.repeat) for b, m in impls.items()}
        py_val, py_t = res["python"]
        cy_val, cy_t = res.get("cython", (py_val, float("nan")))
        rows.append({"kernel": name, "n": n, "python_s": py_t, "cython_s": cy_t,
                     "speedup": py_t / cy_t if cy_t == cy_t and cy_t > 0 else float("nan"),
                     "agree": bool(py_val == cy_val or math.isclose(py_val, cy_val, rel_tol=1e-12))})
    if args.out == "json":
        print(json.dumps(rows, indent=2))
    else:
        print("kernel,n,python_s,cython_s,speedup,agree")
        for r in rows:
            print(f"{r['kernel']},{r['n']},{r['python_s']:.6f},{r['cython_s']:.6f},"
                  f"{r['speedup']:.1f},{str(r['agree']).lower()}")
    return 0 if all(r["agree"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
