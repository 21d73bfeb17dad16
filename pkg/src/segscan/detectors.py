"""Scan detectors: maximize a segment statistic and compare with its threshold.

Four scans are provided:

========================  ===========================  =====================
function                  statistic                    threshold
========================  ===========================  =====================
:func:`scan_linear`       linear (known shape)         ``linear_threshold``
:func:`scan_quadratic`    quadratic                    ``quadratic_threshold``
:func:`scan_binned`       binned, alpha-driven bins    ``quadratic_threshold``
:func:`scan_adaptive`     binned, ``min(D, ceil log n)``  ``quadratic_threshold``
========================  ===========================  =====================

Each scan visits every segment with ``min_len <= k - j <= max_len``.  Passing
``workers > 1`` splits the length range into contiguous chunks evaluated on a
thread pool; the reduction (largest value, then smallest ``j``, then smallest
``k``) makes the outcome independent of the worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import ConfigError, DegenerateTemplate
from .series import Segment, SeriesView
from .statistics import (
    DEFAULT_DELTA,
    ShapeTemplate,
    ThresholdSpec,
    bin_tables,
    coef_table,
    linear_threshold,
    quadratic_threshold,
)

#: Longest series for which an uncapped scan is allowed by default.
DEFAULT_FULL_SCAN_LIMIT = 2000


@dataclass(frozen=True)
class ScanConfig:
    delta: float = DEFAULT_DELTA
    max_len: Optional[int] = None
    min_len: int = 1
    alpha: Optional[float] = None
    adaptive_L: Optional[int] = None
    adaptive_alpha0: Optional[float] = None


@dataclass(frozen=True)
class ScanOutcome:
    max_stat: float
    argmax: Segment
    threshold: float
    reject: bool
    stats_evaluated: int

    def as_record(self) -> dict:
        return {
            "max_stat": self.max_stat,
            "j": self.argmax.j,
            "k": self.argmax.k,
            "threshold": self.threshold,
            "reject": self.reject,
            "stats_evaluated": self.stats_evaluated,
        }


def _length_range(n: int, cfg: ScanConfig, cap: Optional[int] = None):
    if cfg.delta < 0:
        raise ConfigError("delta must be nonnegative")
    if n < 2:
        raise ConfigError("scans need a series of length >= 2")
    max_len = cfg.max_len
    if max_len is None:
        if n > DEFAULT_FULL_SCAN_LIMIT and cap is None:
            raise ConfigError(
                f"n={n} exceeds {DEFAULT_FULL_SCAN_LIMIT}; supply max_len to bound the O(n*D) scan"
            )
        max_len = n
    if cap is not None:
        max_len = min(max_len, cap)
    max_len = min(int(max_len), n)
    min_len = int(cfg.min_len)
    if min_len < 1:
        raise ConfigError("min_len must be >= 1")
    if min_len > max_len:
        raise ConfigError(f"min_len={min_len} exceeds max_len={max_len}")
    return min_len, max_len


def _chunks(lo: int, hi: int, workers: int):
    workers = max(1, min(workers, hi - lo + 1))
    edges = np.linspace(lo, hi + 1, workers + 1).round().astype(int)
    return [(int(a), int(b) - 1) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _reduce(results):
    best, bj, bk, count = -math.inf, -1, -1, 0
    for val, j, k, c in results:
        count += c
        if j >= 0 and kernels.better(val, j, k, best, bj, bk):
            best, bj, bk = float(val), int(j), int(k)
    return best, bj, bk, count


def _run(kernel, lo: int, hi: int, workers: Optional[int]):
    if workers is None or workers <= 1:
        return _reduce([kernel(lo, hi)])
    parts = _chunks(lo, hi, workers)
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        return _reduce(list(pool.map(lambda ab: kernel(*ab), parts)))


def _outcome(result, threshold: float) -> ScanOutcome:
    best, bj, bk, count = result
    if bj < 0:
        raise ConfigError("no candidate segment was evaluated")
    return ScanOutcome(
        max_stat=float(best),
        argmax=Segment(bj, bk),
        threshold=threshold,
        reject=bool(best >= threshold),
        stats_evaluated=int(count),
    )


def scan_quadratic(series: SeriesView, cfg: ScanConfig = ScanConfig(), workers: Optional[int] = None) -> ScanOutcome:
    n = series.n
    lo, hi = _length_range(n, cfg)
    coef = coef_table(hi, series.log_n)
    inv_var = 1.0 / series.sigma**2
    p2 = series.prefix2

    def kernel(a, b):
        return kernels.quadratic_scan(p2, coef, inv_var, a, b)

    thr = quadratic_threshold(ThresholdSpec(n, cfg.delta))
    return _outcome(_run(kernel, lo, hi, workers), thr)


def _binned(series, cfg, alpha, lo, hi, workers):
    bins, sizes, coef = bin_tables(series.n, alpha, hi)
    inv_var = 1.0 / series.sigma**2
    p1, p2 = series.prefix1, series.prefix2

    def kernel(a, b):
        return kernels.binned_scan(p1, p2, coef, bins, sizes, inv_var, a, b)

    thr = quadratic_threshold(ThresholdSpec(series.n, cfg.delta))
    return _outcome(_run(kernel, lo, hi, workers), thr)


def scan_binned(series: SeriesView, cfg: ScanConfig, workers: Optional[int] = None) -> ScanOutcome:
    if cfg.alpha is None:
        raise ConfigError("the binned scan needs cfg.alpha")
    if not cfg.alpha > 0:
        raise ConfigError("alpha must be positive")
    lo, hi = _length_range(series.n, cfg)
    return _binned(series, cfg, float(cfg.alpha), lo, hi, workers)


def adaptive_length_cap(n: int, cfg: ScanConfig) -> int:
    if cfg.adaptive_L is not None:
        if cfg.adaptive_L < 1:
            raise ConfigError("adaptive_L must be >= 1")
        return int(cfg.adaptive_L)
    if cfg.adaptive_alpha0 is not None:
        return max(1, math.ceil(math.log(n) ** (2 * cfg.adaptive_alpha0 + 1)))
    raise ConfigError("the adaptive scan needs cfg.adaptive_L (or adaptive_alpha0)")


def scan_adaptive(series: SeriesView, cfg: ScanConfig, workers: Optional[int] = None) -> ScanOutcome:
    cap = adaptive_length_cap(series.n, cfg)
    lo, hi = _length_range(series.n, cfg, cap=cap)
    return _binned(series, cfg, None, lo, hi, workers)


def scan_linear(
    series: SeriesView, template: ShapeTemplate, cfg: ScanConfig = ScanConfig(), workers: Optional[int] = None
) -> ScanOutcome:
    n = series.n
    lo, hi = _length_range(n, cfg)
    thr = linear_threshold(ThresholdSpec(n, cfg.delta))
    sigma = series.sigma

    if template.constant:
        # f0 == c: every statistic is a segment sum over sigma * sqrt(D) (the sign of c matters)
        c = float(template.grid(1)[0])
        if c == 0.0:
            raise DegenerateTemplate("constant template is identically zero")
        lengths = np.arange(hi + 1, dtype=np.float64)
        lengths[0] = 1.0
        scale = math.copysign(1.0, c) / (sigma * np.sqrt(lengths))
        p1 = series.prefix1

        def kernel(a, b):
            return kernels.prefix_linear_scan(p1, scale, a, b)

        return _outcome(_run(kernel, lo, hi, workers), thr)

    values = series.values

    def kernel(a, b):
        best, bj, bk, count = -math.inf, -1, -1, 0
        for length in range(a, b + 1):
            grid = template.grid(length)
            energy = float(np.dot(grid, grid))
            if energy <= 0.0:
                continue  # length carries no template mass
            val, j, c = kernels.sliding_dot_scan(values, grid, 1.0 / math.sqrt(sigma**2 * energy))
            count += c
            if kernels.better(val, j, j + length, best, bj, bk):
                best, bj, bk = float(val), int(j), int(j + length)
        return best, bj, bk, count

    result = _run(kernel, lo, hi, workers)
    if result[1] < 0:
        raise DegenerateTemplate(f"template {template.name!r} has zero energy at every scanned length")
    return _outcome(result, thr)


DETECTORS = ("linear", "quadratic", "binned", "adaptive")


def run_detector(
    name: str,
    series: SeriesView,
    cfg: ScanConfig,
    template: Optional[ShapeTemplate] = None,
    workers: Optional[int] = None,
) -> ScanOutcome:
    if name == "linear":
        if template is None:
            raise ConfigError("the linear scan needs a template")
        return scan_linear(series, template, cfg, workers)
    if name == "quadratic":
        return scan_quadratic(series, cfg, workers)
    if name == "binned":
        return scan_binned(series, cfg, workers)
    if name == "adaptive":
        return scan_adaptive(series, cfg, workers)
    raise ConfigError(f"unknown detector {name!r}; choose from {DETECTORS}")
