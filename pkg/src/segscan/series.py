"""Observation vectors, segments and noise-scale estimation.

A :class:`SeriesView` holds the observations ``X_1..X_n`` together with their
prefix sums, so that the sum (or sum of squares) over any segment ``(j, k]``
costs two array lookups.
"""

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateScale, InvalidInput, InvalidSegment
from .kernels import prefix_sums

#: Gaussian-consistency factor for the MAD, 1 / Phi^{-1}(3/4).
MAD_SCALE = 1.4826


@dataclass(frozen=True)
class Segment:
    """Half-open index interval ``(j, k]``; covers 0-based array slots ``j..k-1``."""

    j: int
    k: int

    def __post_init__(self):
        if not (0 <= self.j < self.k):
            raise InvalidSegment(f"segment ({self.j}, {self.k}] needs 0 <= j < k")

    @property
    def length(self) -> int:
        return self.k - self.j

    def as_slice(self) -> slice:
        return slice(self.j, self.k)


@dataclass(frozen=True, eq=False)
class SeriesView:
    values: np.ndarray
    sigma: float
    prefix1: np.ndarray
    prefix2: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def log_n(self) -> float:
        return math.log(self.n)

    def check(self, seg: Segment) -> Segment:
        if seg.k > self.n:
            raise InvalidSegment(f"segment ({seg.j}, {seg.k}] exceeds series length {self.n}")
        return seg


def build_series(values, sigma: float) -> SeriesView:
    """Validate ``values`` and precompute compensated prefix sums.

    Raises
    ------
    InvalidInput
        If ``values`` is empty or holds NaN/Inf, or ``sigma`` is not a
        positive finite number.
    """
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    if arr.size == 0:
        raise InvalidInput("series is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("series contains NaN or infinite values")
    sigma = float(sigma)
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidInput(f"sigma must be positive and finite, got {sigma!r}")
    p1, p2 = prefix_sums(arr)
    for a in (arr, p1, p2):
        a.setflags(write=False)
    return SeriesView(values=arr, sigma=sigma, prefix1=p1, prefix2=p2)


def segment_sum(series: SeriesView, seg: Segment) -> float:
    series.check(seg)
    return float(series.prefix1[seg.k] - series.prefix1[seg.j])


def segment_sumsq(series: SeriesView, seg: Segment) -> float:
    series.check(seg)
    return float(series.prefix2[seg.k] - series.prefix2[seg.j])


def estimate_sigma_mad(values) -> float:
    """Robust noise scale ``1.4826 * median(|X - median(X)|)``.

    Raises :class:`DegenerateScale` when the MAD is zero.
    """
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size < 2:
        raise InvalidInput("MAD estimate needs at least two values")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("series contains NaN or infinite values")
    mad = float(np.median(np.abs(arr - np.median(arr))))
    if mad == 0.0:
        raise DegenerateScale("median absolute deviation is zero")
    return MAD_SCALE * mad


def parse_series_text(text: str) -> np.ndarray:
    """Parse one real per line, or a CSV with an ``index,value`` header."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InvalidInput("series file holds no values")
    header = [h.strip().lower() for h in lines[0].split(",")]
    out = []
    if header == ["index", "value"]:
        reader = csv.reader(io.StringIO("\n".join(lines[1:])))
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise InvalidInput(f"line {lineno}: expected 'index,value'")
            out.append(_parse_real(row[1], lineno))
    else:
        for lineno, ln in enumerate(lines, start=1):
            out.append(_parse_real(ln, lineno))
    return np.array(out, dtype=np.float64)


def read_series(path) -> np.ndarray:
    return parse_series_text(Path(path).read_text())


def _parse_real(token: str, lineno: int) -> float:
    try:
        x = float(token)
    except ValueError:
        raise InvalidInput(f"line {lineno}: cannot parse {token!r} as a number") from None
    if not math.isfinite(x):
        raise InvalidInput(f"line {lineno}: non-finite value {token!r}")
    return x
