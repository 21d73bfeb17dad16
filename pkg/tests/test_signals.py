import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segscan.bump import bump, bump_l2_sq, bump_tilde
from segscan.errors import InvalidSpec
from segscan.signals import (
    SignalSpec,
    add_noise,
    counter_rng,
    gen_holder_bumps,
    gen_known_shape,
    gen_rademacher,
    generate,
    holder_block_values,
    holder_gamma_cap,
    holder_gamma_for_amplitude,
    holder_layout,
    holder_quotient,
    standard_normals,
)


class TestBump:
    def test_values(self):
        assert bump_tilde(0.0) == pytest.approx(math.exp(-1))
        assert bump(0.5) == pytest.approx(math.exp(-1))
        assert bump(0.0) == 0.0 and bump(1.0) == 0.0
        assert bump(-0.2) == 0.0 and bump(1.3) == 0.0

    def test_l2_norm_by_two_quadratures(self):
        n = 10**6
        u = (np.arange(n) + 0.5) / n
        midpoint = float(np.mean(bump(u) ** 2))
        assert midpoint == pytest.approx(bump_l2_sq(), abs=1e-8)
        assert bump_l2_sq() == pytest.approx(0.0665430604225, abs=1e-12)

    def test_symmetric(self):
        u = np.linspace(0, 1, 101)
        np.testing.assert_allclose(bump(u), bump(1 - u), rtol=0, atol=1e-15)


class TestKnownShape:
    def test_constant_block(self):
        spec = SignalSpec("known_shape", 10, d=3, a=5, amplitude=2.0, template="constant")
        assert gen_known_shape(spec).tolist() == [0, 0, 0, 0, 0, 2, 2, 2, 0, 0]

    def test_zero_amplitude(self):
        spec = SignalSpec("known_shape", 10, d=3, a=5, amplitude=0.0, template="sine")
        assert not np.any(gen_known_shape(spec))

    @pytest.mark.parametrize("name", ["constant", "sine", "bump"])
    def test_amplitude_accounting(self, name):
        d = 10**4
        mu = gen_known_shape(SignalSpec("known_shape", 10 * d, d=d, a=0, amplitude=1.7, template=name))
        assert np.mean(mu[:d] ** 2) == pytest.approx(1.7**2, rel=0.05)

    def test_placement_must_fit(self):
        with pytest.raises(InvalidSpec):
            SignalSpec("known_shape", 10, d=4, a=7, amplitude=1.0, template="constant")

    def test_random_placement_inside(self):
        spec = SignalSpec("known_shape", 50, d=5, amplitude=1.0, template="constant")
        for r in range(20):
            mu = generate(spec, counter_rng(0, r))
            nz = np.flatnonzero(mu)
            assert nz.size == 5 and nz[-1] - nz[0] == 4


class TestRademacher:
    def test_given_signs(self):
        spec = SignalSpec("rademacher", 4, d=2, a=0, amplitude=3.0, theta=(1, -1))
        assert gen_rademacher(spec).tolist() == [3.0, -3.0, 0.0, 0.0]

    def test_bad_signs(self):
        with pytest.raises(InvalidSpec):
            gen_rademacher(SignalSpec("rademacher", 4, d=2, a=0, amplitude=3.0, theta=(1, -1, 1)))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 200), st.floats(0.0, 10.0), st.integers(0, 2**32))
    def test_amplitude_identity(self, d, gamma, seed):
        mu = gen_rademacher(SignalSpec("rademacher", 400, d=d, amplitude=gamma), counter_rng(seed))
        assert math.fsum(mu * mu) / d == pytest.approx(gamma**2, rel=1e-12, abs=0)


class TestHolderBumps:
    def test_layout_frozen(self):
        assert holder_layout(256, 10**4, 1.0) == (44, 5)

    def test_zero_gamma(self):
        mu = gen_holder_bumps(SignalSpec("holder_bumps", 10**4, d=256, amplitude=0.0, alpha=1.0), counter_rng(1))
        assert not np.any(mu)

    def test_support_and_blocks(self):
        spec = SignalSpec("holder_bumps", 10**4, d=256, amplitude=1.0, alpha=1.0, theta=(1, -1, 1, 1, -1), a=88)
        mu = gen_holder_bumps(spec)
        assert not np.any(mu[:88]) and not np.any(mu[88 + 5 * 44 :])
        blocks = mu[88 : 88 + 220].reshape(5, 44)
        zeta = bump(np.arange(1, 45) / 44)
        for s, sign in enumerate((1, -1, 1, 1, -1)):
            np.testing.assert_array_equal(blocks[s], sign * zeta)

    def test_random_start_on_block_lattice(self):
        spec = SignalSpec("holder_bumps", 10**4, d=256, amplitude=1.0, alpha=1.0)
        for r in range(10):
            mu = gen_holder_bumps(spec, counter_rng(3, r))
            first = np.flatnonzero(mu)[0]
            assert first % 44 == 0

    def test_too_short(self):
        with pytest.raises(InvalidSpec):
            gen_holder_bumps(SignalSpec("holder_bumps", 10**4, d=3, amplitude=1.0, alpha=1.0), counter_rng(0))

    def test_gamma_for_amplitude_sets_rms(self):
        d, n, alpha = 782, 10**4, 1.0
        gamma = holder_gamma_for_amplitude(0.5, d, n, alpha)
        m, l = holder_layout(d, n, alpha)
        mu = gen_holder_bumps(SignalSpec("holder_bumps", n, d=d, a=0, amplitude=gamma, alpha=alpha), counter_rng(0))
        assert math.sqrt(np.sum(mu**2) / (l * m)) == pytest.approx(0.5, rel=1e-12)

    def test_cap_is_applied_with_warning(self):
        spec = SignalSpec("holder_bumps", 10**4, d=256, amplitude=50.0, alpha=1.0, M=1.0, a=0, theta=(1,) * 5)
        with pytest.warns(UserWarning, match="capped"):
            mu = gen_holder_bumps(spec)
        assert np.max(np.abs(mu)) == pytest.approx(holder_gamma_cap(5, 1.0) * math.exp(-1), rel=1e-3)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.5, 2.0])
    @pytest.mark.parametrize("d", [64, 256, 512])
    def test_capped_signal_is_in_holder_ball(self, alpha, d):
        n = 10**4
        m, l = holder_layout(d, n, alpha)
        if l == 0 or m < 2:
            pytest.skip("degenerate layout")
        gamma = holder_gamma_cap(l, alpha, M=1.0)
        theta = np.where(np.arange(l) % 3 == 1, -1.0, 1.0)
        # the underlying function on [0, 1]: l rescaled bumps with alternating-ish signs
        x = np.linspace(0.0, 1.0, 4001)
        s = np.minimum((x * l).astype(int), l - 1)
        f = gamma * theta[s] * bump(x * l - s)
        assert holder_quotient(f, x, alpha) <= 1.0
        # and the d samples themselves
        vals = holder_block_values(l, m, gamma, theta)
        grid = np.arange(vals.shape[0]) / (l * m)
        assert holder_quotient(vals, grid, alpha) <= 1.0


class TestNoise:
    def test_moments(self):
        z = standard_normals(counter_rng(42, 0), 10**5)
        assert abs(z.mean()) < 4 / math.sqrt(10**5)
        assert abs(z.var() - 1) < 0.05

    def test_deterministic_bytes(self):
        a = standard_normals(counter_rng(7, 3, 9, 0), 1000)
        b = standard_normals(counter_rng(7, 3, 9, 0), 1000)
        assert a.tobytes() == b.tobytes()

    def test_streams_differ(self):
        a = standard_normals(counter_rng(7, 3, 9, 0), 100)
        b = standard_normals(counter_rng(7, 3, 9, 1), 100)
        c = standard_normals(counter_rng(8, 3, 9, 0), 100)
        assert not np.array_equal(a, b) and not np.array_equal(a, c)

    def test_draw_depends_only_on_position(self):
        long = standard_normals(counter_rng(1, 2), 5000)
        short = standard_normals(counter_rng(1, 2), 17)
        np.testing.assert_array_equal(short, long[:17])

    def test_tiny_sigma(self):
        mu = np.linspace(-1, 1, 1000)
        x = add_noise(mu, 1e-9, counter_rng(0))
        assert np.max(np.abs(x - mu)) < 6e-8

    @pytest.mark.parametrize("sigma", [0.0, -1.0, math.inf])
    def test_bad_sigma(self, sigma):
        with pytest.raises(InvalidSpec):
            add_noise(np.zeros(3), sigma, counter_rng(0))

    def test_normality(self):
        from scipy import stats

        z = standard_normals(counter_rng(5), 20_000)
        assert stats.kstest(z, "norm").pvalue > 1e-3


class TestSpec:
    def test_round_trip(self):
        spec = SignalSpec("rademacher", 100, d=3, a=4, amplitude=1.5, theta=(1, -1, 1))
        assert SignalSpec.from_config(spec.to_config()) == spec

    @pytest.mark.parametrize(
        "kw",
        [dict(kind="square", n=10), dict(kind="null", n=10, d=11), dict(kind="null", n=10, amplitude=-1.0)],
    )
    def test_invalid(self, kw):
        with pytest.raises(InvalidSpec):
            SignalSpec(**kw)

    def test_long_signal_warns(self):
        with pytest.warns(UserWarning, match="not short"):
            SignalSpec("rademacher", 100, d=80, amplitude=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            SignalSpec("rademacher", 10**4, d=100, amplitude=1.0)
