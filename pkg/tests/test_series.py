import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from segscan import (
    DegenerateScale,
    InvalidInput,
    InvalidSegment,
    Segment,
    build_series,
    estimate_sigma_mad,
    segment_sum,
    segment_sumsq,
)
from segscan.config import fmt, int_list, parse_kv
from segscan.errors import ConfigError
from segscan.kernels import prefix_sums_numba, prefix_sums_numpy
from segscan.series import parse_series_text


class TestSegment:
    def test_length_and_slice(self):
        seg = Segment(3, 7)
        assert seg.length == 4
        assert list(range(10))[seg.as_slice()] == [3, 4, 5, 6]

    @pytest.mark.parametrize("j,k", [(-1, 3), (5, 5), (6, 2)])
    def test_rejects_empty_or_negative(self, j, k):
        with pytest.raises(InvalidSegment):
            Segment(j, k)

    def test_rejects_segment_past_end(self):
        s = build_series(np.zeros(5), 1.0)
        with pytest.raises(InvalidSegment):
            segment_sum(s, Segment(2, 6))


class TestBuildSeries:
    def test_segment_sums(self):
        s = build_series([1, 2, 3, 4], 1.0)
        assert segment_sum(s, Segment(1, 3)) == 5.0
        assert segment_sumsq(s, Segment(0, 4)) == 30.0

    def test_arrays_are_read_only(self):
        s = build_series(np.arange(4.0), 1.0)
        with pytest.raises(ValueError):
            s.values[0] = 1.0

    def test_input_is_copied(self):
        x = np.arange(4.0)
        s = build_series(x, 1.0)
        x[0] = 99.0
        assert s.values[0] == 0.0

    @pytest.mark.parametrize("values", [[], [1.0, np.nan], [np.inf, 0.0]])
    def test_rejects_bad_values(self, values):
        with pytest.raises(InvalidInput):
            build_series(values, 1.0)

    @pytest.mark.parametrize("sigma", [0.0, -1.0, np.nan, np.inf])
    def test_rejects_bad_sigma(self, sigma):
        with pytest.raises(InvalidInput):
            build_series([1.0, 2.0], sigma)

    def test_prefix_sums_are_accurate_for_large_offsets(self):
        # 1e8 offset: naive float64 cumsum drifts, compensated sums do not
        x = 1e8 + np.random.default_rng(0).standard_normal(10**5)
        s = build_series(x, 1.0)
        seg = Segment(50_000, 50_010)
        assert math.isclose(segment_sum(s, seg), math.fsum(x[seg.as_slice()]), rel_tol=1e-12)


@pytest.mark.parametrize("impl", [prefix_sums_numba, prefix_sums_numpy], ids=["numba", "numpy"])
def test_prefix_sum_paths_agree_with_fsum(impl):
    x = np.random.default_rng(3).standard_normal(1000)
    p1, p2 = impl(x)
    assert p1[0] == 0.0 and p2[0] == 0.0
    assert math.isclose(p1[-1], math.fsum(x), rel_tol=1e-13, abs_tol=1e-13)
    assert math.isclose(p2[-1], math.fsum(x * x), rel_tol=1e-13)


class TestMad:
    def test_gaussian_consistency(self):
        x = np.random.default_rng(1).standard_normal(200_000) * 2.5
        assert abs(estimate_sigma_mad(x) / 2.5 - 1.0) < 0.01

    def test_known_value(self):
        # median 3, absolute deviations 2,1,0,1,2 -> MAD 1
        assert estimate_sigma_mad([1, 2, 3, 4, 5]) == pytest.approx(1.4826)

    def test_zero_mad(self):
        with pytest.raises(DegenerateScale):
            estimate_sigma_mad([1.0, 1.0, 1.0, 5.0])

    @settings(max_examples=60, deadline=None)
    @given(
        arrays(np.float64, st.integers(5, 60), elements=st.floats(-1e3, 1e3)),
        st.floats(-1e3, 1e3),
        st.floats(0.01, 100.0),
    )
    def test_shift_and_scale_equivariance(self, x, shift, scale):
        try:
            base = estimate_sigma_mad(x)
        except DegenerateScale:
            return
        moved = estimate_sigma_mad(scale * x + shift)
        assert moved == pytest.approx(scale * base, rel=1e-6, abs=1e-9)


class TestParsing:
    def test_plain_column(self):
        assert parse_series_text("1\n2.5\n\n# note\n-3e-1\n").tolist() == [1.0, 2.5, -0.3]

    def test_index_value_csv(self):
        assert parse_series_text("index,value\n1,0.5\n2,-1\n").tolist() == [0.5, -1.0]

    @pytest.mark.parametrize("text", ["1\nnan\n", "inf\n", "abc\n", "", "index,value\n1\n"])
    def test_rejects(self, text):
        with pytest.raises(InvalidInput):
            parse_series_text(text)


class TestPlanFiles:
    def test_parse(self):
        kv = parse_kv("# c\nn = 100\nd_grid=1, 2,3\n")
        assert kv == {"n": "100", "d_grid": "1, 2,3"}
        assert int_list(kv["d_grid"]) == [1, 2, 3]

    @pytest.mark.parametrize("text", ["n\n", "=3\n", "n=1\nn=2\n"])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_kv(text)

    def test_fmt(self):
        assert fmt(1 / 3) == "0.333333333333"
        assert fmt(True) == "true"
        assert fmt(None) == ""
        assert fmt(7) == "7"
