"""Compare the numba and numpy kernel paths on representative inputs.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from omniap import _kernels
from omniap.construction import build_diamond_set, build_omni_set


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)
    cloud = rng.uniform(-1, 1, (3000, 2))
    lattice = np.stack(np.meshgrid(np.arange(64.0), np.arange(64.0), indexing="ij"), -1).reshape(-1, 2)
    segs = build_omni_set(2, 12).sample_points(1 / 512)
    diamonds = build_diamond_set(2, 2, 5).sample_points(1 / 256)
    yield "min_pairwise_gap  n=3000", lambda u: _kernels.min_pairwise_gap(cloud, use_numba=u)
    yield "max_nearest  4096x4096", lambda u: _kernels.max_nearest_distance(lattice, lattice + 0.01, use_numba=u)
    yield f"fps_packing  n={len(segs)}", lambda u: len(_kernels.fps_packing(segs, 1 / 64, use_numba=u))
    yield f"grid_packing n={len(diamonds)}", lambda u: len(_kernels.grid_packing(diamonds, 1 / 128, use_numba=u))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba unavailable (or OMNIAP_NO_NUMBA set); nothing to compare")
    print(f"{'kernel':32s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, fn in cases():
        fn(True)  # compile outside the timed region
        tn, a = best_of(lambda: fn(True), args.repeat)
        tp, b = best_of(lambda: fn(False), args.repeat)
        same = np.array_equal(a, b)
        print(f"{name:32s} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f}{'' if same else '  MISMATCH'}")


if __name__ == "__main__":
    main()
