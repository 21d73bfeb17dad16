"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py --n 10000 --max-len 500

Both paths are imported from :mod:`segscan.kernels` directly, so the
``SEGSCAN_DISABLE_JIT`` flag does not matter here.  Each kernel is run once
untimed (numba compiles or loads its cache), then timed as the best of
``--repeat`` runs.  Results of the two paths are checked for agreement.
"""

import argparse
import math
import time

import numpy as np

from segscan import build_series, get_template, kernels
from segscan.statistics import bin_tables, coef_table


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(series, max_len):
    n = series.n
    inv_var = 1.0 / series.sigma**2
    p1, p2 = series.prefix1, series.prefix2
    coef = coef_table(max_len, series.log_n)
    bins, sizes, bcoef = bin_tables(n, 1.0, max_len)
    abins, asizes, acoef = bin_tables(n, None, max_len)
    scale = 1.0 / np.sqrt(np.maximum(np.arange(max_len + 1.0), 1.0))
    grid = get_template("bump").grid(max_len)
    return {
        "prefix_sums": lambda k: k(series.values),
        "quadratic_scan": lambda k: k(p2, coef, inv_var, 1, max_len),
        "binned_scan alpha=1": lambda k: k(p1, p2, bcoef, bins, sizes, inv_var, 1, max_len),
        "binned_scan adaptive": lambda k: k(p1, p2, acoef, abins, asizes, inv_var, 1, max_len),
        "prefix_linear_scan": lambda k: k(p1, scale, 1, max_len),
        "sliding_dot_scan": lambda k: k(series.values, grid, 1.0),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-10, atol=1e-10)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--max-len", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    x = np.random.default_rng(args.seed).standard_normal(args.n)
    series = build_series(x, 1.0)
    print(f"n={args.n} max_len={args.max_len} repeat={args.repeat}")
    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}  agree")
    for name, call in cases(series, args.max_len).items():
        base = name.split()[0]
        t_nb, out_nb = best_of(lambda: call(getattr(kernels, base + "_numba")), args.repeat)
        t_np, out_np = best_of(lambda: call(getattr(kernels, base + "_numpy")), args.repeat)
        speedup = t_np / t_nb if t_nb > 0 else math.inf
        print(f"{name:<24}{t_nb:>12.4f}{t_np:>12.4f}{speedup:>10.1f}  {same(out_nb, out_np)}")


if __name__ == "__main__":
    main()
