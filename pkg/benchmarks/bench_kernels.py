#!/usr/bin/env python3
"""Timing comparison of the compiled and pure-python kernel backends.

Times the three hot paths (upwind drift assembly, implicit diffusion
solve, one full IMEX step) at several grid sizes and reports the
per-call cost of each backend plus the speedup.  Exits nonzero when a
backend disagrees with the reference beyond 1e-12 so the benchmark
doubles as a smoke check.

Usage:
    python3 benchmarks/bench_kernels.py [--sizes 256,1024,4096] [--repeat 200]
"""

import argparse
import sys
import time

import numpy as np

from ks1d import _kernels
from ks1d.model import GridSpec, Params, PowerLawDiffusion, State
from ks1d.stepping import StepController, step


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter_ns()
        fn()
        best = min(best, time.perf_counter_ns() - t0)
    return best * 1e-3          # microseconds


def _setup(n, rng):
    grid = GridSpec(n)
    x = grid.centers()
    u = 2.0 + np.cos(2.0 * np.pi * x) + 0.3 * rng.standard_normal(n)
    u = np.abs(u)
    v = np.sin(2.0 * np.pi * x)
    v -= v.mean()
    return grid, u, v


def bench_backend(name, sizes, repeat):
    _kernels.set_backend(name)
    rng = np.random.default_rng(7)
    model = PowerLawDiffusion(0.5)
    rows = {}
    for n in sizes:
        grid, u, v = _setup(n, rng)
        h = grid.h
        dt = 0.1 * h * h
        a_face = 0.5 * (model.a(u[:-1]) + model.a(u[1:]))

        drift = _best_of(lambda: _kernels.chemotaxis_rates(u, v, 1.0, h),
                         repeat)
        solve = _best_of(lambda: _kernels.diffusion_solve(u, a_face, dt, h),
                         repeat)

        params = Params(chi=1.0, eps=1.0, mass=float(h * np.sum(u)))
        state = State(0.0, u, v)
        ctrl = StepController()
        full = _best_of(lambda: step(state, dt, params, model, grid, ctrl),
                        max(5, repeat // 10))
        rows[n] = (drift, solve, full)

        theta = dt / h ** 2 * a_face
        dense = np.eye(n) + np.diag(np.r_[theta, 0.0] + np.r_[0.0, theta])
        dense -= np.diag(theta, 1) + np.diag(theta, -1)
        ref = np.linalg.solve(dense, u)
        got = _kernels.diffusion_solve(u, a_face, dt, h)
        if not np.allclose(got, ref, rtol=1e-12, atol=1e-14):
            raise SystemExit(f"{name} backend disagrees with dense solve")
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="256,1024,4096")
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = _kernels.available_backends()
    print(f"available backends: {', '.join(backends)}")
    if len(backends) < 2:
        print("compiled backend not built; timing pure python only")

    previous = _kernels.get_backend()
    results = {}
    try:
        for name in backends:
            results[name] = bench_backend(name, sizes, args.repeat)
    finally:
        _kernels.set_backend(previous)

    header = f"{'kernel':>10} {'n':>6}"
    for name in backends:
        header += f" {name + ' (us)':>14}"
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    print(header)
    for k, label in enumerate(("drift", "tridiag", "full step")):
        for n in sizes:
            line = f"{label:>10} {n:>6}"
            for name in backends:
                line += f" {results[name][n][k]:>14.2f}"
            if len(backends) == 2:
                ratio = (results["python"][n][k]
                         / results["compiled"][n][k])
                line += f" {ratio:>8.2f}x"
            print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
