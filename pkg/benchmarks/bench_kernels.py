#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the k-nearest search, the all-distances scan and the interference sum
at simulation-representative sizes, plus one end-to-end drop batch.  The
package-wide path selection is controlled by the DCEC_DISABLE_NUMBA
environment variable; this script times both implementations directly.

Usage: python benchmarks/bench_kernels.py [--drops N]
"""
import argparse
import time

import numpy as np

from dcecsim import (CacheConfig, SystemParams, build_placement, kernels,
                     request_probabilities, run_experiment, zipf_popularity)


def timeit(fn, repeat=20):
    fn()  # warm up (JIT compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat * 1e3  # ms


def bench_knearest():
    rng = np.random.default_rng(0)
    print(f"{'k-nearest (torus)':<34} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for n_sbs, n_users, k in ((80, 480, 4), (400, 2400, 4), (400, 2400, 1),
                              (400, 2400, 8)):
        pts = rng.uniform(0, 1000.0, (n_sbs, 2))
        qs = rng.uniform(0, 1000.0, (n_users, 2))
        t_np = timeit(lambda: kernels.knearest_numpy(qs, pts, k, 1000.0))
        if kernels.NUMBA_AVAILABLE:
            t_nb = timeit(lambda: kernels.knearest_numba(qs, pts, k, 1000.0))
            ratio = f"{t_np / t_nb:7.1f}x"
        else:
            t_nb, ratio = float("nan"), "    n/a"
        label = f"  {n_users} users x {n_sbs} SBS, k={k}"
        print(f"{label:<34} {t_np:8.3f}ms {t_nb:8.3f}ms {ratio}")


def bench_alldist_and_interference():
    rng = np.random.default_rng(1)
    n = 400
    pts = rng.uniform(0, 1000.0, (n, 2))
    q = rng.uniform(0, 1000.0, 2)
    print(f"\n{'per-link kernels (n=400)':<34} {'numpy':>10} {'numba':>10}")
    t_np = timeit(lambda: kernels.alldist_numpy(q, pts, 1000.0), repeat=200)
    t_nb = (timeit(lambda: kernels.alldist_numba(q, pts, 1000.0), repeat=200)
            if kernels.NUMBA_AVAILABLE else float("nan"))
    print(f"{'  alldist':<34} {t_np:8.4f}ms {t_nb:8.4f}ms")
    dists = rng.uniform(0.5, 700.0, n)
    tt = rng.uniform(-np.pi, np.pi, n)
    tr = rng.uniform(-np.pi, np.pi, n)
    h = rng.exponential(size=n)
    args = (dists, 3, tt, tr, h, 63.1, 0.63, 0.1745, 0.4506, 0.3, 1.0, 1.6,
            1.58e-7)
    t_np = timeit(lambda: kernels.interference_sum_numpy(*args), repeat=200)
    t_nb = (timeit(lambda: kernels.interference_sum_numba(*args), repeat=200)
            if kernels.NUMBA_AVAILABLE else float("nan"))
    print(f"{'  interference_sum':<34} {t_np:8.4f}ms {t_nb:8.4f}ms")


def bench_end_to_end(n_drops):
    params = SystemParams().with_(sbs_density_lambda_BS=400e-6,
                                  ue_density_lambda_UE=4000e-6)
    catalog = zipf_popularity(2000, 0.56)
    cache = CacheConfig(150, 200, 4)
    placement = build_placement(catalog, cache)
    probs = request_probabilities(catalog, cache, 0.8)

    run_experiment(params, catalog, placement, probs, 3, 1)  # warm up
    t0 = time.perf_counter()
    run_experiment(params, catalog, placement, probs, n_drops, 42)
    dt = time.perf_counter() - t0
    path = "numba" if kernels.USE_NUMBA else "numpy"
    print(f"\nfull drops (400 SBS, 4000 users/km^2), {path} path: "
          f"{dt / n_drops * 1e3:.2f} ms/drop over {n_drops} drops")
    print("set DCEC_DISABLE_NUMBA=1 before launch to time the numpy path")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--drops", type=int, default=200)
    args = parser.parse_args()
    bench_knearest()
    bench_alldist_and_interference()
    bench_end_to_end(args.drops)
