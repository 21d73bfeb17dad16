"""Per-segment scan statistics, the bin planner and rejection thresholds.

Three statistics are evaluated on a candidate segment ``(j, k]`` of length
``D = k - j``:

* the linear statistic, a normalized correlation with a known shape,
* the quadratic statistic, a centred and scaled chi-square,
* the binned statistic, which averages within bins and then applies the
  quadratic statistic to the bin means.

Logarithms are natural throughout.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .bump import bump, bump_l2_sq
from .errors import ConfigError, DegenerateTemplate, InvalidPlan
from .series import Segment, SeriesView

DEFAULT_DELTA = 0.01

# Guards ceilings against values like 10.000000000000002 that are integers in exact arithmetic.
_CEIL_RTOL = 1e-12


def _ceil(x: float) -> int:
    return math.ceil(x * (1.0 - _CEIL_RTOL)) if x > 0 else math.ceil(x)


# ---------------------------------------------------------------- templates


@dataclass(frozen=True)
class ShapeTemplate:
    """A known signal shape on [0, 1].

    ``fn`` must accept and return numpy arrays.  ``constant`` marks the
    flat template, which lets the linear scan run on prefix sums.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    is_unit_l2: bool = False
    name: str = "custom"
    constant: bool = False

    def __call__(self, u):
        return self.fn(np.asarray(u, dtype=np.float64))

    def grid(self, d: int) -> np.ndarray:
        """Samples ``f0(i/d)`` for ``i = 1..d``."""
        u = np.arange(1, d + 1, dtype=np.float64) / d
        g = np.asarray(self.fn(u), dtype=np.float64)
        if g.shape != (d,):
            g = np.broadcast_to(g, (d,)).astype(np.float64)
        if not np.all(np.isfinite(g)):
            raise DegenerateTemplate(f"template {self.name!r} is not finite on the d={d} grid")
        return g

    def grid_energy(self, d: int) -> float:
        g = self.grid(d)
        return float(np.dot(g, g))


def _constant(u):
    return np.ones_like(u)


def _sine(u):
    return math.sqrt(2.0) * np.sin(math.pi * u)


def _unit_bump(u):
    return bump(u) / math.sqrt(bump_l2_sq())


TEMPLATES = {
    "constant": ShapeTemplate(_constant, is_unit_l2=True, name="constant", constant=True),
    "sine": ShapeTemplate(_sine, is_unit_l2=True, name="sine"),
    "bump": ShapeTemplate(_unit_bump, is_unit_l2=True, name="bump"),
}


def get_template(name: str) -> ShapeTemplate:
    try:
        return TEMPLATES[name]
    except KeyError:
        raise ConfigError(f"unknown template {name!r}; choose from {sorted(TEMPLATES)}") from None


# ---------------------------------------------------------------- thresholds


@dataclass(frozen=True)
class ThresholdSpec:
    n: float
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if self.delta < 0:
            raise ConfigError("delta must be nonnegative")
        if self.n < 2:
            raise ConfigError("threshold needs n >= 2")


def linear_threshold(t: ThresholdSpec) -> float:
    """``2 * sqrt((1 + delta) log n)``."""
    return 2.0 * math.sqrt((1.0 + t.delta) * math.log(t.n))


def quadratic_threshold(t: ThresholdSpec) -> float:
    """``2 (1 + delta) sqrt(log n)``; shared by the quadratic, binned and adaptive scans."""
    return 2.0 * (1.0 + t.delta) * math.sqrt(math.log(t.n))


# ---------------------------------------------------------------- statistics


def linear_statistic(series: SeriesView, seg: Segment, template: ShapeTemplate) -> float:
    series.check(seg)
    grid = template.grid(seg.length)
    energy = float(np.dot(grid, grid))
    if energy <= 0.0:
        raise DegenerateTemplate(f"template {template.name!r} has zero energy at length {seg.length}")
    dot = float(np.dot(series.values[seg.as_slice()], grid))
    return dot / math.sqrt(series.sigma**2 * energy)


def quadratic_coef(count: int, log_n: float) -> float:
    return 0.5 / (math.sqrt(count) + math.sqrt(log_n))


def quadratic_statistic(series: SeriesView, seg: Segment, n: Optional[int] = None) -> float:
    series.check(seg)
    log_n = math.log(series.n if n is None else n)
    inv_var = 1.0 / series.sigma**2
    s2 = series.prefix2[seg.k] - series.prefix2[seg.j]
    return quadratic_coef(seg.length, log_n) * (s2 * inv_var - seg.length)


# ---------------------------------------------------------------- bins


@dataclass(frozen=True)
class BinPlan:
    """Partition of ``(j, k]`` into ``l`` bins of size ``m`` (the last may be shorter).

    ``target`` is the bin count asked for by the planning rule before tiling;
    ``l`` is the realized count ``ceil(D / m)``.
    """

    l: int
    m: int
    boundaries: tuple
    target: int

    @property
    def segment(self) -> Segment:
        return Segment(self.boundaries[0], self.boundaries[-1])


def bin_count_target(length: int, log_n: float, alpha: float) -> int:
    """Requested number of bins for a segment of ``length`` under smoothness ``alpha``."""
    if not alpha > 0:
        raise ConfigError("alpha must be positive")
    D = length
    if D <= log_n:
        raw = D
    elif D <= log_n ** (2 * alpha + 1):
        raw = _ceil(log_n)
    elif alpha < 0.25 and D > log_n ** (1.0 / (1.0 - 4 * alpha)):
        raw = D
    else:
        raw = _ceil(D ** (2.0 / (4 * alpha + 1)) * log_n ** (-1.0 / (4 * alpha + 1)))
    return int(min(max(raw, 1), D))


def adaptive_bin_count_target(length: int, log_n: float) -> int:
    """``min(D, ceil(log n))``, the smoothness-free rule of the length-capped scan."""
    return int(max(1, min(length, _ceil(log_n))))


def tile(seg: Segment, target: int) -> BinPlan:
    D = seg.length
    if not 1 <= target <= D:
        raise InvalidPlan(f"bin count {target} not in [1, {D}]")
    m = -(-D // target)
    l = -(-D // m)
    bounds = tuple(min(seg.j + s * m, seg.k) for s in range(l)) + (seg.k,)
    return BinPlan(l=l, m=m, boundaries=bounds, target=target)


def plan_bins(seg: Segment, n: int, alpha: float) -> BinPlan:
    return tile(seg, bin_count_target(seg.length, math.log(n), alpha))


def plan_bins_adaptive(seg: Segment, n: int) -> BinPlan:
    return tile(seg, adaptive_bin_count_target(seg.length, math.log(n)))


def binned_statistic(series: SeriesView, seg: Segment, plan: BinPlan, n: Optional[int] = None) -> float:
    series.check(seg)
    b = plan.boundaries
    if b[0] != seg.j or b[-1] != seg.k:
        raise InvalidPlan(f"plan covers ({b[0]}, {b[-1]}] but segment is ({seg.j}, {seg.k}]")
    log_n = math.log(series.n if n is None else n)
    inv_var = 1.0 / series.sigma**2
    p1 = series.prefix1
    widths = [b[s + 1] - b[s] for s in range(len(b) - 1)]
    if min(widths) <= 0:
        raise InvalidPlan("the plan has an empty bin")
    m = widths[0]
    if any(w != m for w in widths[:-1]) or widths[-1] > m:
        raise InvalidPlan("all bins but the last must share one size, and the last may not exceed it")
    nbins = len(widths)
    # same arithmetic as the scan kernels: full-size bins are pooled before scaling,
    # and singleton bins reduce to the quadratic statistic's sum of squares
    if m == 1:
        s2 = series.prefix2[seg.k] - series.prefix2[seg.j]
        return quadratic_coef(nbins, log_n) * (s2 * inv_var - nbins)
    full = seg.length // m
    acc = 0.0
    for s in range(full):
        y = p1[b[s + 1]] - p1[b[s]]
        acc += y * y
    acc *= inv_var / m
    rest = seg.length - full * m
    if rest > 0:
        y = p1[b[-1]] - p1[b[-2]]
        acc += y * y * (inv_var / rest)
    return quadratic_coef(nbins, log_n) * (acc - nbins)


# ---------------------------------------------------------------- tables for the kernels


@lru_cache(maxsize=64)
def bin_tables(n: int, alpha: Optional[float], max_len: int):
    """Per-length realized bin counts and sizes, plus ``coef[l]`` for every count.

    ``alpha=None`` selects the adaptive rule.  Arrays are indexed by length
    (entry 0 unused).
    """
    log_n = math.log(n)
    bins = np.zeros(max_len + 1, dtype=np.int64)
    sizes = np.ones(max_len + 1, dtype=np.int64)
    for D in range(1, max_len + 1):
        if alpha is None:
            target = adaptive_bin_count_target(D, log_n)
        else:
            target = bin_count_target(D, log_n, alpha)
        m = -(-D // target)
        sizes[D] = m
        bins[D] = -(-D // m)
    coef = coef_table(int(bins.max()) if max_len else 0, log_n)
    for a in (bins, sizes, coef):
        a.setflags(write=False)
    return bins, sizes, coef


def coef_table(top: int, log_n: float) -> np.ndarray:
    """``0.5 / (sqrt(c) + sqrt(log n))`` for ``c = 0..top``."""
    c = np.arange(top + 1, dtype=np.float64)
    return 0.5 / (np.sqrt(c) + math.sqrt(log_n))


# ---------------------------------------------------------------- all segments at once


def statistic_table(
    series: SeriesView,
    kind: str,
    template: Optional[ShapeTemplate] = None,
    alpha: Optional[float] = None,
    max_len: Optional[int] = None,
    n: Optional[int] = None,
) -> np.ndarray:
    """Every segment statistic of one kind as a matrix ``S[j, k]`` (NaN off the scanned set).

    ``kind`` is ``"linear"`` (needs ``template``), ``"quadratic"``, ``"binned"``
    (needs ``alpha``) or ``"adaptive"``.  Values use the scan kernels'
    arithmetic, so ``nanmax`` of the table is the scan maximum.
    """
    from .kernels import binned_sumsq

    size = series.n
    top = size if max_len is None else min(int(max_len), size)
    log_n = math.log(size if n is None else n)
    inv_var = 1.0 / series.sigma**2
    p1, p2 = series.prefix1, series.prefix2
    out = np.full((size + 1, size + 1), np.nan)
    if kind == "binned" and alpha is None:
        raise ConfigError("the binned table needs alpha")
    if kind == "linear" and template is None:
        raise ConfigError("the linear table needs a template")
    for D in range(1, top + 1):
        starts = np.arange(size - D + 1)
        if kind == "quadratic":
            vals = quadratic_coef(D, log_n) * ((p2[D:] - p2[: size - D + 1]) * inv_var - D)
        elif kind in ("binned", "adaptive"):
            if kind == "binned":
                target = bin_count_target(D, log_n, alpha)
            else:
                target = adaptive_bin_count_target(D, log_n)
            m = -(-D // target)
            l = -(-D // m)
            vals = quadratic_coef(l, log_n) * (binned_sumsq(p1, p2, D, m, inv_var) - l)
        elif kind == "linear":
            grid = template.grid(D)
            energy = float(np.dot(grid, grid))
            if energy <= 0.0:
                continue
            vals = np.correlate(series.values, grid, mode="valid") / math.sqrt(series.sigma**2 * energy)
        else:
            raise ConfigError(f"unknown statistic kind {kind!r}")
        out[starts, starts + D] = vals
    return out
