"""Hot loops of the scan detectors.

Every kernel exists twice: a ``*_numba`` version compiled with ``@njit`` and a
``*_numpy`` version vectorized over segment start positions.  The public names
(``prefix_sums``, ``quadratic_scan``, ...) point at one or the other depending on
:data:`segscan._jit.USE_NUMBA`.

All scan kernels share one reduction rule: the largest statistic wins, ties go
to the smallest start ``j`` and then the smallest end ``k``.  Scan kernels
return ``(best, j, k, count)`` where ``count`` is the number of segment
statistics evaluated; ``j = k = -1`` when nothing was evaluated.
"""

import numpy as np

from ._jit import USE_NUMBA, njit

__all__ = [
    "prefix_sums",
    "quadratic_scan",
    "binned_scan",
    "sliding_dot_scan",
    "prefix_linear_scan",
    "better",
]


def better(val, j, k, best, bj, bk):
    """True when candidate ``(val, j, k)`` beats the incumbent under the tie rule."""
    if bj < 0 or val > best:
        return True
    return val == best and (j, k) < (bj, bk)


# ---------------------------------------------------------------- prefix sums


@njit
def prefix_sums_numba(values):
    n = values.shape[0]
    p1 = np.zeros(n + 1)
    p2 = np.zeros(n + 1)
    s1 = 0.0
    c1 = 0.0
    s2 = 0.0
    c2 = 0.0
    for i in range(n):
        x = values[i]
        # Kahan-compensated running sums
        y = x - c1
        t = s1 + y
        c1 = (t - s1) - y
        s1 = t
        y = x * x - c2
        t = s2 + y
        c2 = (t - s2) - y
        s2 = t
        p1[i + 1] = s1
        p2[i + 1] = s2
    return p1, p2


def prefix_sums_numpy(values):
    values = np.asarray(values, dtype=np.float64)
    acc = np.longdouble
    p1 = np.zeros(values.shape[0] + 1)
    p2 = np.zeros(values.shape[0] + 1)
    p1[1:] = np.cumsum(values.astype(acc)).astype(np.float64)
    p2[1:] = np.cumsum(np.square(values.astype(acc))).astype(np.float64)
    return p1, p2


# ---------------------------------------------------------------- quadratic


@njit
def quadratic_scan_numba(p2, coef, inv_var, min_len, max_len):
    n = p2.shape[0] - 1
    best = -np.inf
    bj = -1
    bk = -1
    count = 0
    for j in range(n - min_len + 1):
        top = min(max_len, n - j)
        for length in range(min_len, top + 1):
            val = coef[length] * ((p2[j + length] - p2[j]) * inv_var - length)
            count += 1
            if val > best:
                best = val
                bj = j
                bk = j + length
    return best, bj, bk, count


def quadratic_scan_numpy(p2, coef, inv_var, min_len, max_len):
    n = p2.shape[0] - 1
    best, bj, bk, count = -np.inf, -1, -1, 0
    for length in range(min_len, min(max_len, n) + 1):
        vals = coef[length] * ((p2[length:] - p2[: n - length + 1]) * inv_var - length)
        count += vals.shape[0]
        i = int(np.argmax(vals))
        if better(vals[i], i, i + length, best, bj, bk):
            best, bj, bk = float(vals[i]), i, i + length
    return best, bj, bk, count


# ---------------------------------------------------------------- binned


@njit
def binned_scan_numba(p1, p2, coef_by_bins, bins_by_len, size_by_len, inv_var, min_len, max_len):
    n = p1.shape[0] - 1
    best = -np.inf
    bj = -1
    bk = -1
    count = 0
    for j in range(n - min_len + 1):
        top = min(max_len, n - j)
        for length in range(min_len, top + 1):
            m = size_by_len[length]
            full = length // m
            rest = length - full * m
            k = j + length
            if m == 1:
                # singleton bins: the binned statistic is the quadratic one
                acc = (p2[k] - p2[j]) * inv_var
            else:
                acc = 0.0
                start = j
                for s in range(full):
                    y = p1[start + m] - p1[start]
                    acc += y * y
                    start += m
                acc *= inv_var / m
                if rest > 0:
                    y = p1[k] - p1[start]
                    acc += y * y * (inv_var / rest)
            nbins = bins_by_len[length]
            val = coef_by_bins[nbins] * (acc - nbins)
            count += 1
            if val > best:
                best = val
                bj = j
                bk = k
    return best, bj, bk, count


def binned_sumsq(p1, p2, length, m, inv_var):
    """``sum_s Y_s^2 / sigma^2`` for every start position at one length and bin size."""
    n = p1.shape[0] - 1
    if m == 1:
        return (p2[length:] - p2[: n - length + 1]) * inv_var
    full = length // m
    rest = length - full * m
    starts = np.arange(n - length + 1)
    acc = np.zeros(starts.shape[0])
    for s in range(full):
        y = p1[starts + (s + 1) * m] - p1[starts + s * m]
        acc += y * y
    acc *= inv_var / m
    if rest > 0:
        y = p1[starts + length] - p1[starts + full * m]
        acc += y * y * (inv_var / rest)
    return acc


def binned_scan_numpy(p1, p2, coef_by_bins, bins_by_len, size_by_len, inv_var, min_len, max_len):
    n = p1.shape[0] - 1
    best, bj, bk, count = -np.inf, -1, -1, 0
    for length in range(min_len, min(max_len, n) + 1):
        m = int(size_by_len[length])
        nbins = int(bins_by_len[length])
        vals = coef_by_bins[nbins] * (binned_sumsq(p1, p2, length, m, inv_var) - nbins)
        count += vals.shape[0]
        i = int(np.argmax(vals))
        if better(vals[i], i, i + length, best, bj, bk):
            best, bj, bk = float(vals[i]), i, i + length
    return best, bj, bk, count


# ---------------------------------------------------------------- linear


@njit
def sliding_dot_scan_numba(values, grid, scale):
    """Best ``scale * <values[j:j+d], grid>`` over start positions, for one length."""
    n = values.shape[0]
    d = grid.shape[0]
    best = -np.inf
    bj = -1
    for j in range(n - d + 1):
        acc = 0.0
        for i in range(d):
            acc += values[j + i] * grid[i]
        val = acc * scale
        if val > best:
            best = val
            bj = j
    return best, bj, n - d + 1


def sliding_dot_scan_numpy(values, grid, scale):
    vals = np.correlate(values, grid, mode="valid") * scale
    i = int(np.argmax(vals))
    return float(vals[i]), i, vals.shape[0]


@njit
def prefix_linear_scan_numba(p1, scale_by_len, min_len, max_len):
    """Linear scan for a constant template, where each statistic is a scaled segment sum."""
    n = p1.shape[0] - 1
    best = -np.inf
    bj = -1
    bk = -1
    count = 0
    for j in range(n - min_len + 1):
        top = min(max_len, n - j)
        for length in range(min_len, top + 1):
            val = (p1[j + length] - p1[j]) * scale_by_len[length]
            count += 1
            if val > best:
                best = val
                bj = j
                bk = j + length
    return best, bj, bk, count


def prefix_linear_scan_numpy(p1, scale_by_len, min_len, max_len):
    n = p1.shape[0] - 1
    best, bj, bk, count = -np.inf, -1, -1, 0
    for length in range(min_len, min(max_len, n) + 1):
        vals = (p1[length:] - p1[: n - length + 1]) * scale_by_len[length]
        count += vals.shape[0]
        i = int(np.argmax(vals))
        if better(vals[i], i, i + length, best, bj, bk):
            best, bj, bk = float(vals[i]), i, i + length
    return best, bj, bk, count


if USE_NUMBA:
    prefix_sums = prefix_sums_numba
    quadratic_scan = quadratic_scan_numba
    binned_scan = binned_scan_numba
    sliding_dot_scan = sliding_dot_scan_numba
    prefix_linear_scan = prefix_linear_scan_numba
else:
    prefix_sums = prefix_sums_numpy
    quadratic_scan = quadratic_scan_numpy
    binned_scan = binned_scan_numpy
    sliding_dot_scan = sliding_dot_scan_numpy
    prefix_linear_scan = prefix_linear_scan_numpy
