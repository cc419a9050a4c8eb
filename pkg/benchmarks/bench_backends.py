"""Time the numba and numpy backends on the hot kernels.

    python benchmarks/bench_backends.py [--size N] [--repeat R]

Each kernel runs once per backend to warm up (and compile), then the best of
R timed runs is reported together with the largest relative difference
between the two backends' outputs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from ptstable import Pareto, RosinskiMeasure, TSParams, kernels, sim


def _best(fn, repeat):
    fn()
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = np.maximum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(scale > 0, np.abs(a - b) / scale, 0.0)
    return float(np.nanmax(d))


def cases(size):
    rng = np.random.default_rng(1)
    t = np.exp(rng.uniform(-8, 3, size))
    atom = TSParams(0.5, 1.0, 0, RosinskiMeasure.atom(1.0))
    mixed = TSParams(0.5, 1.0, 0, RosinskiMeasure(1, [((1.0,), Pareto(1.0, 3.0, 1.0)),
                                                      ((-1.0,), Pareto(0.5, 2.5, 0.5))]))
    x = rng.standard_normal((size, 1))
    z = np.linspace(-2, 2, 16)[:, None]
    counts = rng.poisson(20, size // 20)
    vals = rng.standard_normal((int(counts.sum()), 1))

    def radii(params):
        plan = sim._make_plan(params, sim.SimConfig(1e-3, 1))
        u1, u2 = rng.random(size), 1.0 - rng.random(size)
        return lambda: kernels.draw_radii(
            u1, u2, plan.cum_mass, plan.kind, plan.lscale, plan.lmass0, plan.par,
            plan.tab_row, plan.k_tab, plan.p_tab, plan.alpha, plan.p)[1]

    return [
        ("log_gamma_upper(-0.5)", lambda: kernels.log_gamma_upper(-0.5, t)),
        ("log_kernel_k", lambda: kernels.log_kernel_k(t, 0.5, 1.0)),
        ("draw_radii atom", radii(atom)),
        ("draw_radii pareto", radii(mixed)),
        ("segment_sum", lambda: kernels.segment_sum(counts, vals)),
        ("ecf (16 points)", lambda: kernels.ecf(x, z)),
        ("sample n=20000", lambda: sim.sample(atom, sim.SimConfig(1e-2, 20_000, 3), threads=1).values),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, fn in cases(args.size):
        with kernels.use_backend("numba"):
            tn, a = _best(fn, args.repeat)
        with kernels.use_backend("numpy"):
            tp, b = _best(fn, args.repeat)
        print(f"{name:<24}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}{_rel(a, b):>15.2e}")


if __name__ == "__main__":
    main()
