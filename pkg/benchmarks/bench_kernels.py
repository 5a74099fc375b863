"""Time the compiled and numpy kernels on representative problem sizes.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints best-of-N wall time per kernel and backend, the speedup, and the
largest relative difference between the backends' outputs.
"""

import argparse
import timeit

import numpy as np

from typhoon_resilience import kernels


def wind_case(rng):
    n_t, n_cells = 121, 2000
    c_lat = np.linspace(21.8, 23.5, n_t)
    c_lon = np.linspace(112.7, 111.0, n_t)
    vmax = np.linspace(50.0, 30.0, n_t)
    rmax = np.linspace(27.0, 40.0, n_t)
    p_lat = rng.uniform(21.5, 24.0, n_cells)
    p_lon = rng.uniform(110.5, 113.5, n_cells)
    return (c_lat, c_lon, vmax, rmax, p_lat, p_lon)


def hazard_case(rng):
    n_cells, n_t, n_units = 2000, 121, 6000
    wind = rng.uniform(0.0, 60.0, (n_cells, n_t))
    times = np.linspace(0.0, 12.0, n_t)
    cell = rng.integers(0, n_cells, n_units).astype(np.intp)
    span = rng.uniform(0.2, 0.5, n_units)
    vd_line = rng.uniform(40.0, 47.5, n_units)
    vd_tower = rng.uniform(40.0, 47.5, n_units)
    return (wind, times, cell, span, vd_line, vd_tower, 6.0 / vd_tower)


def split_case(rng):
    x = rng.normal(size=640)
    y = (x + rng.normal(scale=0.5, size=640) > 0).astype(np.int64)
    return (x, y, 5)


CASES = {
    "wind_grid": wind_case,
    "unit_hazard_integrals": hazard_case,
    "best_split": split_case,
}


def max_rel_diff(a, b):
    a = np.atleast_1d(np.asarray(a, dtype=float)).ravel()
    b = np.atleast_1d(np.asarray(b, dtype=float)).ravel()
    finite = np.isfinite(a) & np.isfinite(b)
    scale = np.maximum(np.abs(a[finite]), 1e-300)
    return float(np.max(np.abs(a[finite] - b[finite]) / scale, initial=0.0))


def flatten(out):
    if isinstance(out, tuple):
        return np.concatenate([np.atleast_1d(np.asarray(o, dtype=float)).ravel() for o in out])
    return np.asarray(out, dtype=float)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    found = kernels.backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(found)}")
    rng = np.random.default_rng(0)
    header = f"{'kernel':24s}" + "".join(f"{name:>12s}" for name in found) + f"{'speedup':>10s}{'max rel diff':>14s}"
    print(header)
    for kernel, make in CASES.items():
        inputs = make(rng)
        times, outs = {}, {}
        for name, mod in found.items():
            fn = getattr(mod, kernel)
            outs[name] = flatten(fn(*inputs))
            number = 3 if kernel != "best_split" else 200
            times[name] = min(timeit.repeat(lambda: fn(*inputs), number=number, repeat=args.repeat)) / number
        row = f"{kernel:24s}" + "".join(f"{times[n] * 1e3:10.3f}ms" for n in found)
        if "cython" in found:
            row += f"{times['python'] / times['cython']:9.1f}x"
            row += f"{max_rel_diff(outs['python'], outs['cython']):14.2e}"
        print(row)


if __name__ == "__main__":
    main()
