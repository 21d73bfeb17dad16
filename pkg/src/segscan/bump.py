"""Compactly supported smooth bump used by the smooth-signal constructions."""

from functools import lru_cache

import numpy as np
from scipy.integrate import quad


def bump_tilde(v):
    """``exp(-1 / (1 - v**2))`` on ``(-1, 1)``, zero elsewhere."""
    v = np.asarray(v, dtype=np.float64)
    out = np.zeros_like(v)
    inside = np.abs(v) < 1.0
    vi = v[inside]
    out[inside] = np.exp(-1.0 / (1.0 - vi * vi))
    return out if out.ndim else float(out)


def bump(u):
    """The bump rescaled to the unit interval: ``bump_tilde(2u - 1)``, supported on (0, 1)."""
    return bump_tilde(2.0 * np.asarray(u, dtype=np.float64) - 1.0)


@lru_cache(maxsize=None)
def bump_l2_sq() -> float:
    """``int_0^1 bump(u)^2 du`` by adaptive quadrature."""
    val, _ = quad(lambda u: bump(u) ** 2, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val
