"""Mean vectors for the null and for every planted-signal family, plus noise.

Randomness comes from counter-based Philox streams keyed by integers
(typically ``(master_seed, cell, replicate, purpose)``).  Draw ``i`` of a
stream depends only on its key and ``i``, so replicates can be generated in
any order or on any number of threads.
"""

import math
import warnings
from dataclasses import dataclass, fields
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .bump import bump, bump_l2_sq, bump_tilde
from .errors import InvalidSpec
from .statistics import ShapeTemplate, get_template

__all__ = [
    "SignalSpec",
    "bump",
    "bump_tilde",
    "bump_l2_sq",
    "counter_rng",
    "standard_normals",
    "add_noise",
    "gen_null",
    "gen_known_shape",
    "gen_rademacher",
    "gen_holder_bumps",
    "holder_layout",
    "holder_gamma_cap",
    "holder_gamma_for_amplitude",
    "holder_quotient",
    "generate",
]

KINDS = ("null", "known_shape", "rademacher", "holder_bumps")


# ---------------------------------------------------------------- randomness


def counter_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Philox generator for the stream addressed by ``(master_seed, *key)``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def standard_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    """N(0, 1) draws by inverse CDF, one 64-bit counter word per draw.

    Unlike ``rng.standard_normal`` (ziggurat, variable consumption), draw ``i``
    here is a function of counter word ``i`` alone.
    """
    raw = rng.bit_generator.random_raw(int(size))
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def add_noise(mu, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidSpec("sigma must be positive and finite")
    mu = np.asarray(mu, dtype=np.float64)
    return mu + sigma * standard_normals(rng, mu.shape[0])


# ---------------------------------------------------------------- specs


@dataclass(frozen=True)
class SignalSpec:
    """Where and how a signal is planted.

    ``amplitude`` is ``A`` for known shapes and ``gamma`` for the Rademacher
    and bump constructions.  ``a=None`` lets the generator draw the start.
    """

    kind: str
    n: int
    d: int = 1
    a: Optional[int] = None
    amplitude: float = 0.0
    template: Optional[str] = None
    alpha: Optional[float] = None
    M: Optional[float] = None
    theta: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown signal kind {self.kind!r}; choose from {KINDS}")
        if self.n < 1 or self.d < 1:
            raise InvalidSpec("n and d must be positive")
        if self.amplitude < 0 or not math.isfinite(self.amplitude):
            raise InvalidSpec("amplitude must be finite and nonnegative")
        if self.d > self.n:
            raise InvalidSpec(f"d={self.d} exceeds n={self.n}")
        if self.a is not None and (self.a < 0 or self.a + self.d > self.n):
            raise InvalidSpec(f"placement a={self.a}, d={self.d} does not fit in n={self.n}")
        if self.kind != "null" and self.d >= self.n ** 0.9:
            warnings.warn(f"d={self.d} is not short relative to n={self.n}", stacklevel=3)

    def to_config(self) -> str:
        """Flat ``key=value`` block, one pair per line; unset fields are omitted."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name == "theta":
                v = ",".join(str(int(t)) for t in v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config(cls, text_or_dict) -> "SignalSpec":
        if isinstance(text_or_dict, str):
            from .config import parse_kv

            raw = parse_kv(text_or_dict)
        else:
            raw = dict(text_or_dict)
        conv = {
            "kind": str,
            "n": int,
            "d": int,
            "a": int,
            "amplitude": float,
            "template": str,
            "alpha": float,
            "M": float,
            "theta": lambda s: tuple(int(t) for t in str(s).split(",")),
        }
        kwargs = {k: conv[k](v) for k, v in raw.items() if k in conv}
        return cls(**kwargs)


def _start(spec: SignalSpec, rng, span: int) -> int:
    if spec.a is not None:
        return spec.a
    if rng is None:
        raise InvalidSpec("no start index given and no rng to draw one")
    return int(rng.integers(0, spec.n - span + 1))


# ---------------------------------------------------------------- generators


def gen_null(spec: SignalSpec, rng=None) -> np.ndarray:
    return np.zeros(spec.n)


def gen_known_shape(spec: SignalSpec, rng=None, template: Optional[ShapeTemplate] = None) -> np.ndarray:
    """``mu[a + i] = A f0(i / d)`` for ``i = 1..d`` (1-based positions ``a+1..a+d``)."""
    if template is None:
        if spec.template is None:
            raise InvalidSpec("known_shape signals need a template")
        template = get_template(spec.template)
    if spec.d > spec.n:
        raise InvalidSpec("d exceeds n")
    a = _start(spec, rng, spec.d)
    mu = np.zeros(spec.n)
    mu[a : a + spec.d] = spec.amplitude * template.grid(spec.d)
    return mu


def gen_rademacher(spec: SignalSpec, rng=None) -> np.ndarray:
    """``mu[a + i] = theta_i * gamma`` with random or supplied signs."""
    if spec.d > spec.n:
        raise InvalidSpec("d exceeds n")
    if spec.theta is not None:
        theta = np.asarray(spec.theta, dtype=np.float64)
        if theta.shape != (spec.d,) or not np.all(np.abs(theta) == 1):
            raise InvalidSpec(f"theta must be a +-1 vector of length d={spec.d}")
        a = _start(spec, rng, spec.d)
    else:
        if rng is None:
            raise InvalidSpec("random signs need an rng")
        a = _start(spec, rng, spec.d)
        theta = np.where(rng.integers(0, 2, size=spec.d) == 1, 1.0, -1.0)
    mu = np.zeros(spec.n)
    mu[a : a + spec.d] = theta * spec.amplitude
    return mu


def holder_layout(d: int, n: int, alpha: float):
    """Bump width ``m`` and bump count ``l`` for a length-``d`` smooth signal.

    ``m = ceil(d^((4a-1)/(4a+1)) (log n)^(1/(4a+1)))`` and ``l = floor(d / m)``.
    """
    if not alpha > 0:
        raise InvalidSpec("alpha must be positive")
    log_n = math.log(n)
    raw = d ** ((4 * alpha - 1) / (4 * alpha + 1)) * log_n ** (1.0 / (4 * alpha + 1))
    m = max(1, math.ceil(raw * (1.0 - 1e-12)))
    return m, d // m


def gen_holder_bumps(spec: SignalSpec, rng=None) -> np.ndarray:
    """``l`` signed bumps of width ``m`` laid end to end, each scaled by gamma.

    The block occupies ``(a, a + l*m]``; when ``a`` is not given it is drawn as
    ``(j - 1) m`` with ``j`` uniform on ``1..floor((n - d) / m)``.
    """
    if spec.alpha is None:
        raise InvalidSpec("holder_bumps signals need alpha")
    m, l = holder_layout(spec.d, spec.n, spec.alpha)
    if l == 0:
        raise InvalidSpec(f"d={spec.d} is shorter than one bump width m={m}")
    gamma = spec.amplitude
    if spec.M is not None:
        cap = holder_gamma_cap(l, spec.alpha, spec.M)
        if gamma > cap:
            warnings.warn(f"gamma={gamma:.4g} capped at {cap:.4g} to stay in the Holder ball", stacklevel=2)
            gamma = cap
    if spec.theta is not None:
        theta = np.asarray(spec.theta, dtype=np.float64)
        if theta.shape != (l,) or not np.all(np.abs(theta) == 1):
            raise InvalidSpec(f"theta must be a +-1 vector of length l={l}")
    else:
        if rng is None:
            raise InvalidSpec("random signs need an rng")
        theta = np.where(rng.integers(0, 2, size=l) == 1, 1.0, -1.0)
    span = l * m
    if spec.a is not None:
        a = spec.a
        if a + span > spec.n:
            raise InvalidSpec("bump block does not fit")
    else:
        slots = (spec.n - spec.d) // m
        if slots < 1:
            raise InvalidSpec("no room to place the bump block")
        a = (int(rng.integers(1, slots + 1)) - 1) * m
    zeta = bump(np.arange(1, m + 1) / m)
    mu = np.zeros(spec.n)
    mu[a : a + span] = gamma * (theta[:, None] * zeta[None, :]).reshape(-1)
    return mu


def holder_block_values(l: int, m: int, gamma: float, theta) -> np.ndarray:
    """Signal values ``phi_theta(t / (l m))`` for ``t = 0..l m`` (t = 0 included)."""
    zeta = bump(np.arange(1, m + 1) / m)
    body = gamma * (np.asarray(theta, dtype=np.float64)[:, None] * zeta[None, :]).reshape(-1)
    return np.concatenate([[0.0], body])


# ---------------------------------------------------------------- Holder bookkeeping


def _split_alpha(alpha: float):
    """Derivative order ``k`` and exponent ``beta in (0, 1]`` with ``alpha = k + beta``."""
    k = math.ceil(alpha) - 1
    return k, alpha - k


def holder_quotient(values, grid, alpha: float, max_points: int = 4001) -> float:
    """Largest ``|g(x) - g(y)| / |x - y|^beta`` over grid pairs, ``g`` the ``k``-th derivative.

    Derivatives are taken by repeated finite differences, so ``k >= 1`` wants a
    fine uniform grid.
    """
    x = np.asarray(grid, dtype=np.float64)
    g = np.asarray(values, dtype=np.float64)
    k, beta = _split_alpha(alpha)
    for _ in range(k):
        g = np.gradient(g, x)
    if x.shape[0] > max_points:
        raise InvalidSpec(f"grid of {x.shape[0]} points is too large for the pairwise check")
    best = 0.0
    for i in range(x.shape[0] - 1):
        dx = x[i + 1 :] - x[i]
        q = np.abs(g[i + 1 :] - g[i]) / dx**beta
        best = max(best, float(q.max()))
    return best


@lru_cache(maxsize=None)
def bump_holder_seminorm(alpha: float, points: int = 4001) -> float:
    """Numerical Holder seminorm of the unit-interval bump (computed on a fine grid)."""
    k, beta = _split_alpha(alpha)
    if k == 0 and beta == 1.0:
        # Lipschitz constant: max |bump'|, evaluated densely
        u = np.linspace(0.0, 1.0, 200001)
        return float(np.max(np.abs(np.diff(bump(u))) / np.diff(u)))
    u = np.linspace(0.0, 1.0, points)
    return holder_quotient(bump(u), u, alpha, max_points=points)


#: Multiplicative slack on the numerically found seminorm, covering grid discretization.
HOLDER_SAFETY = 1.05


def holder_gamma_cap(l: int, alpha: float, M: float = 1.0) -> float:
    """Largest gamma keeping ``l`` adjacent bumps inside the Holder ball of radius ``M``.

    Rescaling the bump to width ``1/l`` multiplies its seminorm by ``l^alpha``;
    pairs straddling two bumps pass through a zero of the ``k``-th derivative,
    which costs at most a factor ``2^(1 - beta)``.
    """
    _, beta = _split_alpha(alpha)
    c1 = M / (2.0 ** (1.0 - beta) * HOLDER_SAFETY * bump_holder_seminorm(alpha))
    return c1 * l ** (-alpha)


def holder_gamma_for_amplitude(amplitude: float, d: int, n: int, alpha: float) -> float:
    """Gamma giving the bump block root-mean-square ``amplitude`` over its ``l m`` support."""
    m, l = holder_layout(d, n, alpha)
    zeta_sq = float(np.sum(bump(np.arange(1, m + 1) / m) ** 2))
    if l == 0 or zeta_sq == 0.0:
        raise InvalidSpec(f"d={d} gives a degenerate bump layout (m={m}, l={l})")
    return amplitude * math.sqrt(m / zeta_sq)


# ---------------------------------------------------------------- dispatch


_GENERATORS = {
    "null": gen_null,
    "known_shape": gen_known_shape,
    "rademacher": gen_rademacher,
    "holder_bumps": gen_holder_bumps,
}


def generate(spec: SignalSpec, rng=None) -> np.ndarray:
    return _GENERATORS[spec.kind](spec, rng)
