"""Time the compiled kernels against the numpy fallback on identical inputs.

Usage: python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from srbb import _backend
from srbb.laces import irreducible_masks
from srbb.paths import PairPotential, brownian_batch
from srbb.permsample import removal_cdf


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(seed=0):
    gen = np.random.default_rng(seed)
    v = PairPotential("step", 1.0, 1.0)
    n_legs, M = 20, 32
    paths = brownian_batch(gen, 64, n_legs * M, 1.0 / M, 5)
    tr, tv = v.tables()

    def pair(kern):
        out = np.empty((64, n_legs, n_legs))
        kern.pair_energies(paths, n_legs, M, 1.0 / M, v.code, v.eta, v.R, tr, tv, out)
        return out

    N = 6
    masks = np.ascontiguousarray(irreducible_masks(N))
    group = np.zeros(len(masks), dtype=np.int32)
    u = gen.random((512, N * (N - 1) // 2))

    def graphs(kern):
        out = np.zeros((512, 1))
        kern.signed_graph_sums(u, masks, group, out)
        return out

    Np = 500
    theta = 100.0 * (2 * np.pi * np.arange(1, Np + 1)) ** -2.5
    cdf = removal_cdf(theta, Np)
    uu = gen.random((2000, Np))

    def parts(kern):
        out = np.zeros((2000, Np + 1), dtype=np.int64)
        kern.sample_partitions(cdf, uu, out)
        return out

    return [("pair_energies 64x20 legs, M=32, d=5", pair),
            ("signed_graph_sums N=6, 512 samples", graphs),
            ("sample_partitions N=500, 2000 samples", parts)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        fast = _backend.get("cython")
    except ImportError:
        print("compiled extension not built; only the fallback is available")
        return
    slow = _backend.get("python")
    print(f"{'kernel':42s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}  identical")
    for name, fn in cases():
        same = np.array_equal(fn(fast), fn(slow))
        tc = _best(lambda: fn(fast), args.repeat)
        tp = _best(lambda: fn(slow), args.repeat)
        print(f"{name:42s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}  {same}")


if __name__ == "__main__":
    main()
