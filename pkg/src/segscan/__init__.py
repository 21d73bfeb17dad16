"""Scan detectors for very short signal segments in Gaussian noise."""

from ._jit import USE_NUMBA
from .detectors import ScanConfig, ScanOutcome, scan_adaptive, scan_binned, scan_linear, scan_quadratic
from .errors import (
    BisectionError,
    ConfigError,
    DegenerateScale,
    DegenerateTemplate,
    InvalidInput,
    InvalidPlan,
    InvalidSegment,
    InvalidSpec,
    SegscanError,
)
from .series import Segment, SeriesView, build_series, estimate_sigma_mad, segment_sum, segment_sumsq
from .statistics import (
    BinPlan,
    ShapeTemplate,
    ThresholdSpec,
    binned_statistic,
    get_template,
    linear_statistic,
    linear_threshold,
    plan_bins,
    quadratic_statistic,
    quadratic_threshold,
    statistic_table,
)

__version__ = "0.1.0"
