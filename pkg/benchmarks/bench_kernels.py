"""Benchmark the numba kernels against the pure-numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--sizes 200,400,800] [--repeats 5]

Each kernel is timed on identical random inputs under both backends; the
first numba call is excluded (jit compile).  Output is one table row per
(kernel, size) with the speedup factor.
"""
import argparse
import time

import numpy as np

from varan import _kernels as K


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(sizes, repeats, seed):
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        a = rng.normal(size=(n, 2))
        b = rng.normal(size=(n, 2))
        vals = rng.normal(size=n)
        dist2 = ((a[:, None, :] - a[None, :, :]) ** 2).sum(axis=2)
        imgs = np.stack([np.sin(a[:, 0]), a.sum(axis=1)], axis=1)
        cases = [
            ("directed_hausdorff", lambda: K.directed_hausdorff(a, b)),
            ("windowed_min", lambda: K.windowed_min(vals, dist2, 0.1)),
            ("pairwise_lipschitz", lambda: K.pairwise_lipschitz(a, imgs)),
        ]
        for name, fn in cases:
            if K.HAS_NUMBA:
                K.set_backend(True)
                fn()  # compile outside the timed region
                t_nb = _time(fn, repeats)
            else:
                t_nb = np.nan
            K.set_backend(False)
            t_np = _time(fn, repeats)
            K.set_backend(None)
            rows.append((name, n, t_nb, t_np))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="200,400,800")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if not K.HAS_NUMBA:
        print("numba not installed: timing the numpy fallback only")
    rows = bench(sizes, args.repeats, args.seed)
    print(f"{'kernel':22s} {'n':>6s} {'numba (ms)':>12s} {'numpy (ms)':>12s} {'speedup':>9s}")
    for name, n, t_nb, t_np in rows:
        speed = t_np / t_nb if t_nb and np.isfinite(t_nb) else np.nan
        nb_ms = f"{t_nb * 1e3:.3f}" if np.isfinite(t_nb) else "n/a"
        print(f"{name:22s} {n:6d} {nb_ms:>12s} {t_np * 1e3:>12.3f} {speed:>8.1f}x")


if __name__ == "__main__":
    main()
