#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-Python fallback.

Times the hot kernels (simultaneous root finding, batched fiber solving)
and one end-to-end pipeline on both backends, and verifies that the two
produce identical results.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import time

from corrdyn import _kernels_py as kpy

try:
    from corrdyn import _kernels_cy as kcy
except ImportError:
    kcy = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_roots(kern, polys):
    def run():
        for p in polys:
            kern.roots(p)
    return run


def bench_batch(kern, cols, zs):
    def run():
        kern.batch_fiber_roots(cols, 2, zs)
    return run


def check_identical(polys, cols, zs) -> bool:
    for p in polys:
        if kpy.roots(p) != kcy.roots(p):
            return False
    f1, s1 = kpy.batch_fiber_roots(cols, 2, zs)
    f2, s2 = kcy.batch_fiber_roots(cols, 2, zs)
    return f1 == f2 and s1 == s2


def bench_pipeline():
    """Contraction certificate of the degree-100 family (17k samples)."""
    from corrdyn import build_Tn, certify, parse_operator

    fam = build_Tn(parse_operator("(w^2-1)*D^2 + D"), 100).family

    def run():
        certify(fam)
    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = random.Random(12345)
    polys = []
    for _ in range(400):
        deg = rng.randint(3, 12)
        polys.append([complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
                      for _ in range(deg + 1)])
    cols = [
        [-1 + 0j, -0.010101010101010102 + 0j],
        [0.010101010101010102 + 0j, 0j],
        [1 + 0j, 0j],
    ]
    zs = [complex(rng.uniform(-6, 6), rng.uniform(-6, 6)) for _ in range(20_000)]

    if kcy is None:
        print("compiled kernel not built; run pip install -e . first")
        return 1

    rows = []
    t_py = timeit(bench_roots(kpy, polys), args.repeat)
    t_cy = timeit(bench_roots(kcy, polys), args.repeat)
    rows.append(("roots (400 polys, deg 3-12)", t_py, t_cy))

    t_py = timeit(bench_batch(kpy, cols, zs), args.repeat)
    t_cy = timeit(bench_batch(kcy, cols, zs), args.repeat)
    rows.append(("batch fibers (20k points, d=2)", t_py, t_cy))

    from corrdyn import BACKEND

    t_active = timeit(bench_pipeline(), args.repeat)
    rows.append((f"certify pipeline ({BACKEND} backend)", None, t_active))

    print(f"{'benchmark':38s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for name, t_py, t_cy in rows:
        py = f"{t_py * 1e3:8.1f}ms" if t_py is not None else "      --"
        cy = f"{t_cy * 1e3:8.1f}ms" if t_cy is not None else "      --"
        sp = f"{t_py / t_cy:7.1f}x" if t_py and t_cy else "      --"
        print(f"{name:38s} {py:>10s} {cy:>10s} {sp:>8s}")

    ok = check_identical(polys[:100], cols, zs[:2000])
    print(f"backend results identical: {ok}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
