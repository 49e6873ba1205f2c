#!/usr/bin/env python3
"""Benchmark the numba kernel lane against the pure-numpy fallback.

Times the batched integrand evaluations that dominate every quadrature
call, plus one end-to-end operator evaluation per lane.  Run with
FRACHOPF_BACKEND=numpy to confirm the fallback alone also works.

Usage:
    python benchmarks/bench_kernels.py [--rows 200000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from frachopf import backend
from frachopf.fields import degenerate_w, gaussian
from frachopf.integrate import QuadSpec
from frachopf.quadrature import frac_laplacian


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_rows(rows, repeats):
    rng = np.random.default_rng(0)
    n = 2
    Y = np.ascontiguousarray(rng.normal(size=(rows, n)) + np.array([2.0, 0.0]))
    Z = np.ascontiguousarray(0.5 * np.abs(rng.normal(size=(rows, n))) + 0.01)
    x = np.array([0.05, 0.0])
    w = degenerate_w(n, 1.0)
    mode, code, par, lam = w.wdesc
    beta = n + 0.5

    cases = {
        "field_rows": lambda lane: lane.field_rows(code, par, Y),
        "pair_kernel_rows": lambda lane: lane.pair_kernel_rows(
            mode, code, par, lam, x, w.at(x), Y, beta),
        "near_ball_rows": lambda lane: lane.near_ball_rows(
            mode, code, par, lam, x, w.at(x), Z, beta),
        "sym_diff_rows": lambda lane: lane.sym_diff_rows(
            code, par, x, w.at(x), Z, beta),
        "inv_dist_rows": lambda lane: lane.inv_dist_rows(x, Y, beta),
    }

    print(f"rows = {rows}")
    print(f"{'kernel':>20} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}")
    for name, call in cases.items():
        timings = {}
        for lane_name in ("numpy", "numba"):
            try:
                backend.set_backend(lane_name)
            except RuntimeError:
                timings[lane_name] = float("nan")
                continue
            lane = backend.get_lane()
            call(lane)  # warm up (jit compile on the numba lane)
            timings[lane_name] = time_call(lambda: call(lane), repeats)
        ratio = timings["numpy"] / timings["numba"]
        print(f"{name:>20} {timings['numpy']*1e3:12.3f} "
              f"{timings['numba']*1e3:12.3f} {ratio:8.2f}x")


def bench_end_to_end(repeats):
    u = gaussian(2, scale=1.0)
    spec = QuadSpec()
    print(f"\n{'end-to-end':>20} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}")
    timings = {}
    values = {}
    for lane_name in ("numpy", "numba"):
        try:
            backend.set_backend(lane_name)
        except RuntimeError:
            timings[lane_name] = float("nan")
            continue
        frac_laplacian(u, [0.3, 0.1], 0.75, spec)  # warm up
        timings[lane_name] = time_call(
            lambda: values.__setitem__(
                lane_name, frac_laplacian(u, [0.3, 0.1], 0.75, spec).value),
            repeats)
    ratio = timings["numpy"] / timings["numba"]
    print(f"{'frac_laplacian n=2':>20} {timings['numpy']*1e3:12.3f} "
          f"{timings['numba']*1e3:12.3f} {ratio:8.2f}x")
    if len(values) == 2:
        print(f"lane agreement: |numpy - numba| = "
              f"{abs(values['numpy'] - values['numba']):.3e}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    prev = backend.backend_name()
    print(f"default backend: {prev}")
    try:
        bench_rows(args.rows, args.repeats)
        bench_end_to_end(args.repeats)
    finally:
        backend.set_backend(prev)


if __name__ == "__main__":
    main()
