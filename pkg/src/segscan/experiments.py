"""Monte Carlo calibration and power experiments, rates and boundary grids.

Replicate ``r`` of grid cell ``c`` draws its noise from the stream
``(master_seed, c, r, 0)`` and its signal placement/signs from
``(master_seed, c, r, 1)``.  Cells are indexed by the position of ``d`` in
``d_grid``, so every amplitude multiple at a given ``d`` sees the same noise
(common random numbers).  Replicates run on a thread pool capped by the
``SEGSCAN_THREADS`` environment variable; results are gathered in replicate
order, so output does not depend on the number of threads.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .config import float_list, fmt, int_list
from .detectors import DETECTORS, ScanConfig, run_detector
from .errors import BisectionError, ConfigError, InvalidSpec
from .series import build_series
from .signals import SignalSpec, counter_rng, generate, holder_gamma_for_amplitude, standard_normals
from .statistics import get_template

RATE_MODES = ("known", "arbitrary", "smooth")

_DEFAULT_SIGNAL = {"linear": "known_shape", "quadratic": "rademacher", "binned": "holder_bumps", "adaptive": "holder_bumps"}
_DEFAULT_MODE = {"linear": "known", "quadratic": "arbitrary", "binned": "smooth", "adaptive": "smooth"}


def worker_count(requested: Optional[int] = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("SEGSCAN_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SEGSCAN_THREADS={env!r} is not an integer") from None
    return os.cpu_count() or 1


# ---------------------------------------------------------------- rates


@dataclass(frozen=True)
class RateQuery:
    n: float
    d: float
    mode: str
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.mode not in RATE_MODES:
            raise ConfigError(f"unknown rate mode {self.mode!r}; choose from {RATE_MODES}")
        if self.d < 1 or self.n < 3:
            raise ConfigError("rates need d >= 1 and n >= 3")
        if (self.alpha is not None) != (self.mode == "smooth"):
            raise ConfigError("alpha is required for, and only for, mode='smooth'")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError("alpha must be positive")


def optimal_rate(q: RateQuery) -> float:
    """Detection-boundary amplitude scale (constants dropped) for a length-``d`` signal."""
    log_n = math.log(q.n)
    r = log_n / q.d
    short = math.sqrt(r)
    if q.mode == "known":
        return short
    if q.mode == "arbitrary":
        return short + r**0.25
    a = q.alpha
    smooth = q.d ** (-2 * a / (4 * a + 1)) * log_n ** (a / (4 * a + 1))
    return short + min(smooth, r**0.25)


def rate(n, d, mode, alpha=None) -> float:
    return optimal_rate(RateQuery(n, d, mode, alpha))


# ---------------------------------------------------------------- plans


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything a Monte Carlo experiment needs.

    Scanned lengths at signal length ``d`` run from ``floor(min_len_factor * d)``
    to ``ceil(max_len_factor * d)`` (clipped to ``[1, n]``) unless ``max_len``
    fixes an absolute cap.  Null calibration scans ``1..max_len`` (``n`` when
    unset).
    """

    n: int
    detector: str
    signal: Optional[str] = None
    d_grid: tuple = ()
    c_grid: tuple = ()
    replicates: int = 100
    master_seed: int = 0
    sigma: float = 1.0
    delta: float = 0.01
    alpha: Optional[float] = None
    template: str = "constant"
    adaptive_L: Optional[int] = None
    rate_mode: Optional[str] = None
    max_len: Optional[int] = None
    min_len_factor: float = 0.0
    max_len_factor: float = 2.0
    bracket: tuple = (0.05, 20.0)
    bisect_iters: int = 8
    workers: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ConfigError(f"unknown detector {self.detector!r}; choose from {DETECTORS}")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.n < 3:
            raise ConfigError("n must be >= 3")
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive")
        if self.signal is None:
            object.__setattr__(self, "signal", _DEFAULT_SIGNAL[self.detector])
        if self.rate_mode is None:
            object.__setattr__(self, "rate_mode", _DEFAULT_MODE[self.detector])
        object.__setattr__(self, "d_grid", tuple(int(d) for d in self.d_grid))
        object.__setattr__(self, "c_grid", tuple(float(c) for c in self.c_grid))
        if any(d < 1 for d in self.d_grid):
            raise ConfigError("d_grid entries must be >= 1")
        if self.detector == "binned" and self.alpha is None:
            raise ConfigError("the binned detector needs alpha")
        if (self.signal == "holder_bumps" or self.rate_mode == "smooth") and self.alpha is None:
            raise ConfigError("smooth signals and rates need alpha")
        if self.detector == "adaptive" and self.adaptive_L is None:
            raise ConfigError("the adaptive detector needs adaptive_L")

    @classmethod
    def from_kv(cls, kv: dict, **overrides) -> "ExperimentPlan":
        conv = {
            "n": int,
            "detector": str,
            "signal": str,
            "d_grid": int_list,
            "c_grid": float_list,
            "replicates": int,
            "master_seed": int,
            "seed": int,
            "sigma": float,
            "delta": float,
            "alpha": float,
            "template": str,
            "adaptive_L": int,
            "L": int,
            "rate_mode": str,
            "max_len": int,
            "min_len_factor": float,
            "max_len_factor": float,
            "bracket": lambda v: tuple(float_list(v)),
            "bisect_iters": int,
        }
        aliases = {"seed": "master_seed", "L": "adaptive_L"}
        kwargs = {}
        for key, value in kv.items():
            if key not in conv:
                continue
            kwargs[aliases.get(key, key)] = conv[key](value)
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"incomplete plan: {exc}") from None

    def rate(self, d: int) -> float:
        return rate(self.n, d, self.rate_mode, self.alpha if self.rate_mode == "smooth" else None)

    def scan_config(self, d: Optional[int] = None) -> ScanConfig:
        if d is None:
            lo, hi = 1, self.max_len
        else:
            lo = max(1, int(math.floor(self.min_len_factor * d)))
            hi = self.max_len if self.max_len is not None else math.ceil(self.max_len_factor * d)
            hi = min(self.n, hi)
            lo = min(lo, hi)
        return ScanConfig(delta=self.delta, max_len=hi, min_len=lo, alpha=self.alpha, adaptive_L=self.adaptive_L)

    def signal_spec(self, d: int, amplitude: float) -> SignalSpec:
        if self.signal == "null" or amplitude == 0.0:
            return SignalSpec("null", self.n, d=min(d, self.n))
        if self.signal == "holder_bumps":
            gamma = holder_gamma_for_amplitude(amplitude, d, self.n, self.alpha)
            return SignalSpec("holder_bumps", self.n, d=d, amplitude=gamma, alpha=self.alpha)
        if self.signal == "known_shape":
            return SignalSpec("known_shape", self.n, d=d, amplitude=amplitude, template=self.template)
        if self.signal == "rademacher":
            return SignalSpec("rademacher", self.n, d=d, amplitude=amplitude)
        raise ConfigError(f"unknown signal kind {self.signal!r}")


NoiseFn = Callable[[int, np.random.Generator], np.ndarray]


def _default_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    return standard_normals(rng, n)


def _rejections(plan: ExperimentPlan, cell: int, spec: SignalSpec, cfg: ScanConfig, noise: NoiseFn) -> np.ndarray:
    template = get_template(plan.template) if plan.detector == "linear" else None

    def one(rep: int) -> bool:
        mu = generate(spec, counter_rng(plan.master_seed, cell, rep, 1))
        x = mu + plan.sigma * noise(plan.n, counter_rng(plan.master_seed, cell, rep, 0))
        series = build_series(x, plan.sigma)
        return run_detector(plan.detector, series, cfg, template=template).reject

    workers = worker_count(plan.workers)
    reps = range(plan.replicates)
    if workers == 1:
        return np.fromiter((one(r) for r in reps), dtype=bool, count=plan.replicates)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.fromiter(pool.map(one, reps), dtype=bool, count=plan.replicates)


def binomial_se(p: float, r: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / r)


# ---------------------------------------------------------------- null calibration


@dataclass(frozen=True)
class NullReport:
    n: int
    detector: str
    replicates: int
    rejections: int
    empirical_fpr: float
    binomial_se: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.empirical_fpr <= self.bound + 3.0 * self.binomial_se

    def csv(self) -> str:
        head = "n,detector,replicates,rejections,empirical_fpr,binomial_se,bound,within_bound"
        row = [self.n, self.detector, self.replicates, self.rejections,
               self.empirical_fpr, self.binomial_se, self.bound, self.within_bound]
        return head + "\n" + ",".join(fmt(v) for v in row) + "\n"


def calibrate_null(plan: ExperimentPlan, noise: Optional[NoiseFn] = None) -> NullReport:
    """Fraction of pure-noise replicates the detector rejects, next to the ``n^(-2 delta)`` bound."""
    spec = SignalSpec("null", plan.n)
    rej = _rejections(plan, 0, spec, plan.scan_config(None), noise or _default_noise)
    p = float(rej.mean())
    return NullReport(
        n=plan.n,
        detector=plan.detector,
        replicates=plan.replicates,
        rejections=int(rej.sum()),
        empirical_fpr=p,
        binomial_se=binomial_se(p, plan.replicates),
        bound=plan.n ** (-2.0 * plan.delta),
    )


# ---------------------------------------------------------------- power


@dataclass(frozen=True)
class PowerRow:
    d: int
    c: float
    amplitude: float
    rejections: Optional[int]
    replicates: int
    power: Optional[float]
    se: Optional[float]
    flag: str = ""


POWER_HEADER = "d,c,amplitude,rejections,replicates,power,se,flag"


def power_csv(rows) -> str:
    lines = [POWER_HEADER]
    for r in rows:
        lines.append(",".join(fmt(v) for v in (r.d, r.c, r.amplitude, r.rejections, r.replicates, r.power, r.se, r.flag)))
    return "\n".join(lines) + "\n"


def power_at(plan: ExperimentPlan, cell: int, d: int, amplitude: float, noise: Optional[NoiseFn] = None) -> float:
    """Empirical rejection rate with a signal of length ``d`` and the given amplitude."""
    rej = _rejections(plan, cell, plan.signal_spec(d, amplitude), plan.scan_config(d), noise or _default_noise)
    return float(rej.mean())


def _feasible(plan: ExperimentPlan, d: int) -> str:
    if d >= plan.n:
        return "infeasible:d>=n"
    if plan.signal == "holder_bumps":
        try:
            holder_gamma_for_amplitude(1.0, d, plan.n, plan.alpha)
        except InvalidSpec:
            return "infeasible:bump_layout"
    return ""


def power_curve(plan: ExperimentPlan, noise: Optional[NoiseFn] = None) -> list:
    """Power at amplitude ``c * rate(d)`` for every ``(d, c)`` in the plan grids."""
    if not plan.d_grid or not plan.c_grid:
        raise ConfigError("power curves need nonempty d_grid and c_grid")
    if plan.signal == "null":
        raise ConfigError("power curves need a non-null signal kind")
    rows = []
    for cell, d in enumerate(plan.d_grid):
        flag = _feasible(plan, d)
        for c in plan.c_grid:
            if flag:
                rows.append(PowerRow(d, c, float("nan"), None, plan.replicates, None, None, flag))
                continue
            amp = c * plan.rate(d)
            rej = _rejections(plan, cell, plan.signal_spec(d, amp), plan.scan_config(d), noise or _default_noise)
            p = float(rej.mean())
            rows.append(PowerRow(d, c, amp, int(rej.sum()), plan.replicates, p, binomial_se(p, plan.replicates)))
    return rows


# ---------------------------------------------------------------- boundary grid


BOUNDARY_HEADER = "row_type,mode,d,c,amplitude,x,y,power,se"

#: Overlays drawn on the boundary grid: (label, rate mode, alpha).
OVERLAYS = (("known", "known", None), ("arbitrary", "arbitrary", None),
            ("smooth_alpha_0.2", "smooth", 0.2), ("smooth_alpha_1", "smooth", 1.0))


def asymptotic_boundary(x: float, mode: str, alpha: Optional[float] = None) -> float:
    """Boundary exponent ``y = log A / log log n`` at ``x = log d / log log n`` as ``n`` grows."""
    short = (1.0 - x) / 2.0
    if mode == "known":
        return short
    long_ = (1.0 - x) / 4.0
    if mode == "arbitrary":
        return max(short, long_)
    smooth = alpha * (1.0 - 2.0 * x) / (4.0 * alpha + 1.0)
    return max(short, min(smooth, long_))


def boundary_grid(plan: ExperimentPlan, noise: Optional[NoiseFn] = None, overlay_points: int = 61) -> list:
    """Power cells in ``(log d, log A) / log log n`` coordinates plus boundary overlays.

    Returns rows as dicts keyed by :data:`BOUNDARY_HEADER` columns.
    """
    lln = math.log(math.log(plan.n))
    if lln <= 0:
        raise ConfigError("boundary coordinates need log log n > 0 (n > e^e)")
    rows = []
    for r in power_curve(plan, noise):
        ok = r.power is not None and r.amplitude > 0
        rows.append({
            "row_type": "cell", "mode": plan.rate_mode, "d": r.d, "c": r.c, "amplitude": r.amplitude,
            "x": math.log(r.d) / lln, "y": math.log(r.amplitude) / lln if ok else None,
            "power": r.power, "se": r.se,
        })
    xs = [math.log(d) / lln for d in plan.d_grid] or [0.0]
    x_hi = max(max(xs), 2.0) + 0.5
    log_n = math.log(plan.n)
    for label, mode, alpha in OVERLAYS:
        for x in np.linspace(0.0, x_hi, overlay_points):
            d = log_n ** float(x)
            if d >= 1.0:
                rows.append({"row_type": "rate", "mode": label, "d": d, "c": None, "amplitude": None, "x": float(x),
                             "y": math.log(rate(plan.n, d, mode, alpha)) / lln, "power": None, "se": None})
            rows.append({"row_type": "asymptote", "mode": label, "d": d, "c": None, "amplitude": None,
                         "x": float(x), "y": asymptotic_boundary(float(x), mode, alpha), "power": None, "se": None})
    return rows


def boundary_csv(rows) -> str:
    cols = BOUNDARY_HEADER.split(",")
    lines = [BOUNDARY_HEADER]
    for r in rows:
        lines.append(",".join(fmt(r[c]) for c in cols))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- exponent fit


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    intercept: float
    d: tuple
    a50: tuple

    def csv(self) -> str:
        lines = ["d,a50,log_d,log_a50"]
        for d, a in zip(self.d, self.a50):
            lines.append(",".join(fmt(v) for v in (d, a, math.log(d), math.log(a))))
        lines.append(f"# slope={fmt(self.slope)} stderr={fmt(self.stderr)} intercept={fmt(self.intercept)}")
        return "\n".join(lines) + "\n"


def half_power_amplitude(power: Callable[[float], float], lo: float, hi: float, iters: int = 8) -> float:
    """Bisect ``log A`` for the amplitude where ``power(A)`` crosses 1/2."""
    log_lo, log_hi = math.log(lo), math.log(hi)
    p_lo, p_hi = power(lo), power(hi)
    if not (p_lo < 0.5 <= p_hi):
        raise BisectionError(
            f"power does not cross 1/2 on [{lo:.4g}, {hi:.4g}]: p(lo)={p_lo:.3f}, p(hi)={p_hi:.3f}",
            {"lo": lo, "hi": hi, "power_lo": p_lo, "power_hi": p_hi},
        )
    for _ in range(iters):
        mid = 0.5 * (log_lo + log_hi)
        if power(math.exp(mid)) >= 0.5:
            log_hi = mid
        else:
            log_lo = mid
    return math.exp(0.5 * (log_lo + log_hi))


def exponent_fit(plan: ExperimentPlan, power_fn: Optional[Callable[[int, float], float]] = None,
                 noise: Optional[NoiseFn] = None) -> ExponentFit:
    """Slope of ``log A50`` against ``log d`` across ``plan.d_grid``."""
    if len(plan.d_grid) < 2:
        raise ConfigError("an exponent fit needs at least two lengths")
    a50 = []
    for cell, d in enumerate(plan.d_grid):
        if power_fn is None:
            def p(amp, cell=cell, d=d):
                return power_at(plan, cell, d, amp, noise)
        else:
            def p(amp, d=d):
                return float(power_fn(d, amp))
        base = plan.rate(d)
        try:
            a50.append(half_power_amplitude(p, plan.bracket[0] * base, plan.bracket[1] * base, plan.bisect_iters))
        except BisectionError as exc:
            exc.diagnostics["d"] = d
            raise
    fit = stats.linregress(np.log(plan.d_grid), np.log(a50))
    return ExponentFit(float(fit.slope), float(fit.stderr), float(fit.intercept), plan.d_grid, tuple(a50))

