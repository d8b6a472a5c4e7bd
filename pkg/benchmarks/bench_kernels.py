"""Benchmark the numba kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py [--repeat N]

The same workloads run through both implementations (the env flag
SAFETYCUBE_NUMBA only picks the default at import; here we call both
directly), so the table reflects the speedup the JIT path buys on the hot
geometry loops.
"""

import argparse
import time

import numpy as np

from safetycube import kernels


def annular_sector(center, r_lo, r_hi, lo, hi, pts=24):
    ang = np.linspace(lo, hi, pts)
    outer = center + r_hi * np.column_stack([np.cos(ang), np.sin(ang)])
    inner = center + r_lo * np.column_stack([np.cos(ang[::-1]), np.sin(ang[::-1])])
    return np.ascontiguousarray(np.vstack([outer, inner]))


def workloads(rng):
    poly = annular_sector(np.array([0.0, 0.0]), 2.0, 5.0, -0.8, 0.8)
    pts = rng.uniform(-6, 6, (20000, 2))
    xs = np.ascontiguousarray(pts[:, 0])
    ys = np.ascontiguousarray(pts[:, 1])

    pairs = []
    for _ in range(400):
        c1 = rng.uniform(-4, 4, 2)
        c2 = rng.uniform(-4, 4, 2)
        pairs.append(
            (
                annular_sector(c1, rng.uniform(0.5, 2), rng.uniform(2.5, 5), -0.7, 0.7),
                annular_sector(c2, rng.uniform(0.5, 2), rng.uniform(2.5, 5), 0.3, 1.9),
            )
        )

    n = 600
    ts = np.arange(n) / 30.0
    a = np.ascontiguousarray(np.column_stack([6.0 * ts, 0.02 * rng.standard_normal(n)]))
    b = np.ascontiguousarray(np.column_stack([0.02 * rng.standard_normal(n), 1.4 * ts - 10]))

    return {
        "points_in_polygon (20k pts)": ("points_in_polygon", (xs, ys, poly)),
        "points_edge_distance (20k pts)": ("points_edge_distance", (xs, ys, poly)),
        "polygons_boundary_cross (400 pairs)": ("polygons_boundary_cross", pairs),
        "polygon_self_intersects (400x)": ("polygon_self_intersects", [p for p, _ in pairs]),
        "first_polyline_intersection (600x600)": ("first_polyline_intersection", (a, b)),
        "polyline_closest_point (600x600)": ("polyline_closest_point", (a, b + 20.0)),
        "closest_approach_time (600 pts)": ("closest_approach_time", (a, ts, 3.0, 0.5)),
    }


def run(fn, args, repeat):
    # warm-up (JIT compile / cache load)
    _consume(fn, args)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        _consume(fn, args)
        best = min(best, time.perf_counter() - t0)
    return best


def _consume(fn, args):
    if isinstance(args, list):
        for item in args:
            fn(*item) if isinstance(item, tuple) else fn(item)
    else:
        fn(*args)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    opts = ap.parse_args()

    if not kernels.NUMBA_ENABLED:
        print("numba path unavailable (SAFETYCUBE_NUMBA=0 or import failure); ")
        print("only the numpy fallback will run.\n")

    rng = np.random.default_rng(0)
    loads = workloads(rng)
    name_w = max(len(k) for k in loads) + 2
    print(f"{'workload':<{name_w}} {'numba':>10} {'numpy':>10} {'speedup':>9}")
    for label, (name, args) in loads.items():
        t_numpy = run(kernels.NUMPY_IMPLS[name], args, opts.repeat)
        if kernels.NUMBA_ENABLED:
            t_numba = run(getattr(kernels, name), args, opts.repeat)
            print(
                f"{label:<{name_w}} {t_numba * 1e3:>8.2f}ms {t_numpy * 1e3:>8.2f}ms"
                f" {t_numpy / t_numba:>8.1f}x"
            )
        else:
            print(f"{label:<{name_w}} {'-':>10} {t_numpy * 1e3:>8.2f}ms {'-':>9}")


if __name__ == "__main__":
    main()
