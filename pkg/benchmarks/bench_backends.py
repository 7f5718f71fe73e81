"""Benchmark the compiled kernels against the NumPy fallback.

Runs the two hot kernels (weighted compact history sum, batched tridiagonal
solve) and a full time march under each available backend and prints timings
plus speedups.  Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from fracadi import SpatialMesh, build_fitted_mesh, solve
from fracadi import _kernels as K
from fracadi.verification import manufactured_singular


def _time(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(m, n_fields, repeat):
    rng = np.random.default_rng(0)
    fields = [rng.standard_normal((m + 1, m + 1)) for _ in range(n_fields)]
    coeffs = rng.standard_normal(n_fields)
    sub = np.full(m - 2, 1.0 / 12.0 - 0.02)
    diag = np.full(m - 1, 10.0 / 12.0 + 0.04)
    rhs = rng.standard_normal((m - 1, m - 1))
    rows = {}
    for backend in K.available_backends():
        K.set_backend(backend)
        rows[backend] = (
            _time(lambda: K.weighted_compact_sum(fields, coeffs), repeat),
            _time(lambda: K.thomas_solve_many(sub, diag, sub, rhs), repeat * 10),
        )
    return rows


def bench_solve(nt, m, repeat):
    problem = manufactured_singular(0.5)
    tmesh = build_fitted_mesh(nt, theta=4.0, tf=1.0, alpha=0.5)
    smesh = SpatialMesh(m, m, 1.0)
    rows = {}
    for backend in K.available_backends():
        K.set_backend(backend)
        rows[backend] = _time(lambda: solve(problem.spec, tmesh, smesh), repeat)
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="smaller sizes, fewer repeats")
    args = parser.parse_args()

    default = K.active_backend()
    m = 32 if args.quick else 64
    nt = 64 if args.quick else 192
    n_fields = 64 if args.quick else 256
    repeat = 2 if args.quick else 3

    print(f"available backends: {', '.join(K.available_backends())}")
    print(f"grid {m}x{m}, history depth {n_fields}, march nt={nt}\n")

    kernels = bench_kernels(m, n_fields, repeat)
    solves = bench_solve(nt, m, repeat)
    K.set_backend(default)

    header = f"{'backend':<10} {'weighted sum':>14} {'thomas batch':>14} {'full march':>14}"
    print(header)
    print("-" * len(header))
    for backend in sorted(kernels):
        ws, th = kernels[backend]
        print(f"{backend:<10} {ws:>12.4f} s {th:>12.6f} s {solves[backend]:>12.4f} s")
    if "compiled" in kernels and "python" in kernels:
        su = kernels["python"][0] / kernels["compiled"][0]
        st = kernels["python"][1] / kernels["compiled"][1]
        sm = solves["python"] / solves["compiled"]
        print(f"\nspeedup (python/compiled): weighted sum {su:.2f}x, "
              f"thomas {st:.2f}x, full march {sm:.2f}x")


if __name__ == "__main__":
    main()
