"""Independent reference implementations used by the tests.

Everything here sums raw values directly (no prefix sums) and re-derives bin
plans from the planning rule, so agreement with the package is meaningful.
"""

import math
from fractions import Fraction

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def windows(x, D):
    return sliding_window_view(np.asarray(x, dtype=np.float64), D)


def linear_all(x, sigma, D, f):
    u = np.arange(1, D + 1) / D
    g = f(u)
    energy = np.sum(g * g)
    if energy == 0.0:
        return None  # the template carries no mass at this length
    return windows(x, D) @ g / math.sqrt(sigma**2 * energy)


def linear_scale(x, sigma, D, f):
    """Size of the terms entering the linear dot product."""
    g = f(np.arange(1, D + 1) / D)
    return np.abs(windows(x, D)) @ np.abs(g) / math.sqrt(sigma**2 * np.sum(g * g))


def quadratic_all(x, sigma, D, n):
    w = windows(x, D)
    return 0.5 / (math.sqrt(D) + math.sqrt(math.log(n))) * np.sum(w * w / sigma**2 - 1.0, axis=1)


def quadratic_scale(x, sigma, D, n):
    """Size of the terms entering the quadratic sum, for cancellation-aware tolerances."""
    w = windows(x, D)
    return 0.5 / (math.sqrt(D) + math.sqrt(math.log(n))) * (np.sum(w * w, axis=1) / sigma**2 + D)


def binned_all(x, sigma, D, n, target):
    m = -(-D // target)
    w = windows(x, D)
    l = -(-D // m)
    total = np.zeros(w.shape[0])
    scale = np.zeros(w.shape[0])
    for s in range(l):
        part = w[:, s * m : min((s + 1) * m, D)]
        y = part.sum(axis=1) / math.sqrt(part.shape[1])
        total += y * y / sigma**2 - 1.0
        scale += y * y / sigma**2 + 1.0
    coef = 0.5 / (math.sqrt(l) + math.sqrt(math.log(n)))
    return coef * total, coef * scale


def plan_target(D, log_n, alpha):
    """Bin-count rule, written independently of the package."""
    if D <= log_n:
        return D
    if D <= log_n ** (2 * alpha + 1):
        return min(D, round_up(log_n))
    if alpha < 0.25 and D > log_n ** (1 / (1 - 4 * alpha)):
        return D
    return min(D, max(1, round_up(D ** (2 / (4 * alpha + 1)) / log_n ** (1 / (4 * alpha + 1)))))


def round_up(v):
    r = round(v)
    return int(r) if abs(v - r) < 1e-9 else math.ceil(v)


def mixture_affinity_bruteforce(means, weights, sigma=1.0):
    """``sum w_i w_j exp(<mu_i, mu_j> / sigma^2)`` with exact rational weights and fsum."""
    means = np.asarray(means, dtype=np.float64)
    gram = means @ means.T / sigma**2
    w = [Fraction(x).limit_denominator(10**9) for x in weights]
    return math.fsum(float(w[i] * w[j]) * math.exp(gram[i, j]) for i in range(len(w)) for j in range(len(w)))


def smooth_affinity_double_loop(N, l, x):
    P = N - l + 1
    c = math.cosh(x)
    return math.fsum(c ** max(l - abs(a - b), 0) for a in range(P) for b in range(P)) / P**2


def noise_values(seed, n, sigma=1.0):
    return np.random.default_rng(seed).standard_normal(n) * sigma
