#!/usr/bin/env python3
"""Compare the numba and pure-numpy threshold-sweep kernels.

Usage:
    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 50 100 200 --repeat 5
    python3 benchmarks/bench_kernels.py --output bench.json
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from layerscope import _kernels as K
from layerscope.metric import FiniteMetricSpace


def random_space(n: int, seed: int) -> FiniteMetricSpace:
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 4 * n, size=(n, 2))
    return FiniteMetricSpace.from_points(pts.tolist(), metric="manhattan")


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(sizes, repeat: int, k: int, seed: int) -> list[dict]:
    rows = []
    for n in sizes:
        Z = random_space(n, seed)
        n_levels = len(Z.levels)
        births = K.vertex_births(Z.rank, k, n_levels)
        ref = K.sweep_labels_numpy(Z.rank, births, n_levels)
        row = {"n": n, "levels": n_levels,
               "sweep_numpy_s": best_of(lambda: K.sweep_labels_numpy(Z.rank, births, n_levels), repeat),
               "sizes_numpy_s": best_of(lambda: K.cluster_sizes_numpy(ref), repeat)}
        if K.NUMBA_ENABLED:
            # first call compiles
            out = K.sweep_labels_numba(Z.rank, births, n_levels)
            K.cluster_sizes_numba(ref)
            assert np.array_equal(out, ref), "kernels disagree"
            assert np.array_equal(K.cluster_sizes_numba(ref), K.cluster_sizes_numpy(ref))
            row["sweep_numba_s"] = best_of(lambda: K.sweep_labels_numba(Z.rank, births, n_levels), repeat)
            row["sizes_numba_s"] = best_of(lambda: K.cluster_sizes_numba(ref), repeat)
            row["sweep_speedup"] = row["sweep_numpy_s"] / row["sweep_numba_s"]
        rows.append(row)
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[25, 50, 100, 200])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--output")
    args = ap.parse_args()

    print(f"numba enabled: {K.NUMBA_ENABLED}")
    rows = run(args.sizes, args.repeat, args.k, args.seed)
    print(f"{'n':>5} {'levels':>7} {'numpy sweep':>12} {'numba sweep':>12} {'speedup':>8}")
    for r in rows:
        nb = r.get("sweep_numba_s")
        sp = r.get("sweep_speedup")
        print(f"{r['n']:>5} {r['levels']:>7} {r['sweep_numpy_s']:>12.5f} "
              f"{nb if nb is None else format(nb, '.5f'):>12} {sp if sp is None else format(sp, '.1f'):>8}")
    if args.output:
        with open(args.output, "w") as fh:
            json.dump({"numba": K.NUMBA_ENABLED, "results": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
