"""Chi-square affinities of the lower-bound mixtures against pure noise.

For Gaussian mixtures ``g = sum_i w_i N(mu_i, sigma^2 I)`` against ``f = N(0, sigma^2 I)``,

    int g^2 / f = sum_{i,j} w_i w_j exp(<mu_i, mu_j> / sigma^2),

which :func:`chi2_affinity_oracle` evaluates by brute force.  The closed forms
below exploit the structure of each construction and are checked against it.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .bump import bump, bump_l2_sq
from .errors import InvalidSpec
from .signals import holder_layout
from .statistics import ShapeTemplate, get_template

#: Log-affinities beyond this are reported as +inf.
LOG_OVERFLOW = 300.0
MAX_COMPONENTS = 2**16


class AffinityOverflow(RuntimeWarning):
    pass


@dataclass(frozen=True)
class MixtureSpec:
    weights: np.ndarray
    means: np.ndarray  # shape (components, dim)
    sigma: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        if w.ndim != 1 or w.shape[0] != mu.shape[0]:
            raise InvalidSpec("need one weight per mean vector")
        if np.any(w < 0) or abs(math.fsum(w) - 1.0) > 1e-12:
            raise InvalidSpec("weights must be nonnegative and sum to 1")
        if not self.sigma > 0:
            raise InvalidSpec("sigma must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)


@dataclass(frozen=True)
class AffinityReport:
    exact: float
    first_bound: Optional[float]
    regime: str
    second_bound: Optional[float] = None
    approx_overlap: Optional[float] = None
    overflow: bool = False


def _finish(log_value: float) -> float:
    if log_value > LOG_OVERFLOW:
        warnings.warn("chi-square affinity exceeds e^300; reporting +inf", AffinityOverflow, stacklevel=3)
        return math.inf
    return math.exp(log_value)


def log_chi2_affinity_oracle(spec: MixtureSpec, block: int = 1024) -> float:
    w, mu = spec.weights, spec.means
    if w.shape[0] > MAX_COMPONENTS:
        raise InvalidSpec(f"{w.shape[0]} components exceed the enumeration guard of {MAX_COMPONENTS}")
    keep = w > 0
    w, mu = w[keep], mu[keep]
    logw = np.log(w)
    inv_var = 1.0 / spec.sigma**2
    parts = []
    for s in range(0, w.shape[0], block):
        gram = mu[s : s + block] @ mu.T * inv_var
        parts.append(logsumexp(gram + logw[s : s + block, None] + logw[None, :]))
    return float(logsumexp(parts))


def chi2_affinity_oracle(spec: MixtureSpec) -> float:
    """``sum_{i,j} w_i w_j exp(<mu_i, mu_j> / sigma^2)`` by enumeration."""
    return _finish(log_chi2_affinity_oracle(spec))


# ---------------------------------------------------------------- overlap sums


def _log_cosh(x: float) -> float:
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def _overlap_counts(placements: int, length: int):
    """Ordered placement pairs by overlap: ``(overlap, count)`` for overlap >= 1."""
    out = [(length, placements)]
    for t in range(1, min(length, placements)):
        out.append((length - t, 2 * (placements - t)))
    return out


def _overlap_affinity(placements: int, length: int, x: float) -> float:
    """``E cosh(x)^overlap`` for two independent uniform placements of a length-``length`` window."""
    lc = _log_cosh(x)
    if lc == 0.0:
        return 1.0
    P2 = float(placements) ** 2
    pairs = _overlap_counts(placements, length)
    if length * lc < 600.0:
        excess = math.fsum(cnt / P2 * math.expm1(ov * lc) for ov, cnt in pairs)
        return 1.0 + excess
    zero_pairs = P2 - sum(cnt for _, cnt in pairs)
    terms = [math.log(cnt / P2) + ov * lc for ov, cnt in pairs]
    if zero_pairs > 0:
        terms.append(math.log(zero_pairs / P2))
    return _finish(float(logsumexp(terms)))


def _approx_overlap_value(placements: int, length: int, x: float) -> float:
    """Overlap sum with the approximate pair weights ``2 (P - 1 - t) / P^2`` per offset ``t``.

    These weights do not sum to one; the value is kept for comparison with the exact sum.
    """
    c = math.cosh(x)
    P = placements
    w = [2.0 * (P - 1 - t) / P**2 for t in range(length)]
    try:
        return (1.0 - math.fsum(w)) + math.fsum(wt * c ** (length - t) for t, wt in enumerate(w))
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------- constructions


def affinity_known_shape(n: int, d: int, gamma: float, template, sigma: float = 1.0) -> AffinityReport:
    """Affinity of the ``floor(n/d)`` disjoint placements of ``gamma * f0``; exact."""
    if not 1 <= d <= n:
        raise InvalidSpec("need 1 <= d <= n")
    if isinstance(template, str):
        template = get_template(template)
    K = n // d
    energy = gamma**2 * template.grid_energy(d) / sigma**2
    if energy < 600.0:
        value = 1.0 + math.expm1(energy) / K
    else:
        value = _finish(energy - math.log(K) + math.log1p((K - 1) * math.exp(-energy)))
    return AffinityReport(exact=value, first_bound=None, regime="known_shape", overflow=math.isinf(value))


def affinity_arbitrary_exact(n: int, d: int, gamma: float) -> AffinityReport:
    """Rademacher signs of size gamma on a uniformly placed length-``d`` window."""
    if not 1 <= d <= n:
        raise InvalidSpec("need 1 <= d <= n")
    P = n - d + 1
    g2 = gamma * gamma
    exact = _overlap_affinity(P, d, g2)
    bound1 = _bound(d, P, d * g2)
    bound2 = _bound(d, P, d * g2 * g2) if g2 <= 1.0 else None
    regime = "arbitrary_first" if bound2 is None or bound1 <= bound2 else "arbitrary_second"
    return AffinityReport(
        exact=exact,
        first_bound=bound1,
        second_bound=bound2,
        approx_overlap=_approx_overlap_value(P, d, g2),
        regime=regime,
        overflow=math.isinf(exact),
    )


def _bound(d: int, placements: int, exponent: float) -> float:
    """``1 + 2 d exp(exponent) / placements``."""
    log_term = math.log(2.0 * d / placements) + exponent
    if log_term > LOG_OVERFLOW:
        return math.inf
    return 1.0 + math.exp(log_term)


def affinity_smooth_exact(N: int, l: int, x: float) -> float:
    """``E cosh(x)^((l - |a - a'|)_+)`` with ``a, a'`` uniform on ``0..N-l``."""
    if not 1 <= l <= N:
        raise InvalidSpec("need 1 <= l <= N")
    if x < 0:
        raise InvalidSpec("x must be nonnegative")
    return _overlap_affinity(N - l + 1, l, x)


@dataclass(frozen=True)
class ZetaNorm:
    norm_sq: float
    ratio: float  # norm_sq / (m * ||bump||^2), unscaled


def zeta_norm_sq(m: int, gamma_scale: float = 1.0) -> ZetaNorm:
    """``sum_{i=1..m} (scale * bump(i/m))^2`` and its ratio to ``m ||bump||_2^2``."""
    if m < 1:
        raise InvalidSpec("m must be >= 1")
    z = bump(np.arange(1, m + 1) / m)
    raw = math.fsum(z * z)
    return ZetaNorm(norm_sq=gamma_scale**2 * raw, ratio=raw / (m * bump_l2_sq()))


@dataclass(frozen=True)
class SmoothMixtureCertificate:
    n: int
    d: int
    alpha: float
    c: float
    gamma_sq: float
    m: int
    l: int
    N: int
    zeta_sq: float
    x: float
    exact: float
    rhs: float
    holds: bool
    short_signal: bool  # d is not much longer than log n
    degenerate: bool  # the bump samples vanish (m = 1), so the mixture is pure noise


def smooth_mixture_certificate(n: int, d: int, alpha: float, c: float) -> SmoothMixtureCertificate:
    """Exact bump-mixture affinity at ``gamma^2 = c (r + r^(4a/(4a+1)))``, ``r = log n / d``,
    compared with ``1 + 2 sqrt(l / (N - l + 1))``."""
    if c < 0:
        raise InvalidSpec("c must be nonnegative")
    log_n = math.log(n)
    r = log_n / d
    gamma_sq = c * (r + r ** (4 * alpha / (4 * alpha + 1)))
    m, l = holder_layout(d, n, alpha)
    N = (n - d) // m
    if l < 1 or N - l + 1 < 1:
        raise InvalidSpec(f"layout m={m}, l={l}, N={N} leaves no room for the mixture")
    zeta_sq = zeta_norm_sq(m).norm_sq
    x = gamma_sq * zeta_sq
    exact = affinity_smooth_exact(N, l, x)
    rhs = 1.0 + 2.0 * math.sqrt(l / (N - l + 1))
    short = d < 10.0 * log_n
    if short:
        warnings.warn(f"d={d} is not much larger than log n={log_n:.3g}", stacklevel=2)
    return SmoothMixtureCertificate(
        n=n, d=d, alpha=alpha, c=c, gamma_sq=gamma_sq, m=m, l=l, N=N,
        zeta_sq=zeta_sq, x=x, exact=exact, rhs=rhs, holds=bool(exact <= rhs),
        short_signal=short, degenerate=zeta_sq == 0.0,
    )


# ---------------------------------------------------------------- mixtures for the oracle


def known_shape_mixture(n: int, d: int, gamma: float, template, sigma: float = 1.0) -> MixtureSpec:
    if isinstance(template, str):
        template = get_template(template)
    K = n // d
    means = np.zeros((K, n))
    g = gamma * template.grid(d)
    for j in range(K):
        means[j, j * d : (j + 1) * d] = g
    return MixtureSpec(np.full(K, 1.0 / K), means, sigma)


def _sign_patterns(length: int) -> np.ndarray:
    idx = np.arange(2**length)[:, None]
    bits = (idx >> np.arange(length)[None, :]) & 1
    return np.where(bits == 1, 1.0, -1.0)


def arbitrary_mixture(n: int, d: int, gamma: float) -> MixtureSpec:
    P = n - d + 1
    signs = _sign_patterns(d)
    means = np.zeros((P * signs.shape[0], n))
    for a in range(P):
        means[a * signs.shape[0] : (a + 1) * signs.shape[0], a : a + d] = gamma * signs
    count = means.shape[0]
    return MixtureSpec(np.full(count, 1.0 / count), means)


def smooth_mixture(N: int, l: int, m: int, gamma: float) -> MixtureSpec:
    """``N`` blocks of width ``m``; ``l`` consecutive blocks carry signed bumps."""
    P = N - l + 1
    zeta = bump(np.arange(1, m + 1) / m)
    signs = _sign_patterns(l)
    body = gamma * (signs[:, :, None] * zeta[None, None, :]).reshape(signs.shape[0], l * m)
    means = np.zeros((P * signs.shape[0], N * m))
    for a in range(P):
        means[a * signs.shape[0] : (a + 1) * signs.shape[0], a * m : (a + l) * m] = body
    count = means.shape[0]
    return MixtureSpec(np.full(count, 1.0 / count), means)
