import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import imputeaudit.signal_math as sm
from imputeaudit.errors import ConfigError, EmptyInputError, ShapeError
from imputeaudit.signal_math import (
    CwtConfig,
    DtwConfig,
    PeakSet,
    cwt,
    detect_peaks_cwt,
    dtw_distance,
    mae,
    ricker_wavelet,
)
from imputeaudit.signal_math._dtw_py import dtw as dtw_py

from _oracles import dtw_bruteforce

finite_floats = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
short_series = st.lists(finite_floats, min_size=1, max_size=12)


def gaussian_bump(length, center, sigma, amplitude=1.0):
    t = np.arange(float(length))
    return amplitude * np.exp(-((t - center) ** 2) / (2.0 * sigma**2))


class TestDtwExamples:
    def test_identity(self):
        assert dtw_distance([1, 2, 3], [1, 2, 3]) == 0.0

    def test_collapse_example(self):
        # the doubled zero aligns onto the single zero at no cost
        assert dtw_distance([0, 0, 1], [0, 1]) == 0.0

    def test_mismatch_example(self):
        assert dtw_distance([0, 3], [0, 0]) == 3.0

    def test_squared_distance(self):
        cfg = DtwConfig(pointwise_distance="squared")
        assert dtw_distance([0, 3], [0, 0], cfg) == 9.0

    def test_band_zero_is_diagonal_sum(self):
        a = [1.0, 5.0, 2.0, 8.0]
        b = [2.0, 2.0, 4.0, 3.0]
        cfg = DtwConfig(band_radius=0)
        expected = sum(abs(x - y) for x, y in zip(a, b))
        assert dtw_distance(a, b, cfg) == expected


class TestDtwOracle:
    def test_matches_bruteforce_on_random_integer_pairs(self):
        rng = np.random.default_rng(1234)
        for _ in range(300):
            n = int(rng.integers(1, 9))
            m = int(rng.integers(1, 9))
            a = rng.integers(-5, 6, size=n).astype(float)
            b = rng.integers(-5, 6, size=m).astype(float)
            assert dtw_distance(a, b) == dtw_bruteforce(a, b)

    def test_matches_bruteforce_squared(self):
        rng = np.random.default_rng(99)
        cfg = DtwConfig(pointwise_distance="squared")
        for _ in range(100):
            n = int(rng.integers(1, 9))
            m = int(rng.integers(1, 9))
            a = rng.integers(-5, 6, size=n).astype(float)
            b = rng.integers(-5, 6, size=m).astype(float)
            assert dtw_distance(a, b, cfg) == dtw_bruteforce(a, b, squared=True)

    def test_matches_bruteforce_banded(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(2, 9))
            m = int(rng.integers(max(2, n - 2), min(9, n + 3)))
            band = int(rng.integers(abs(n - m), 9))
            a = rng.integers(-5, 6, size=n).astype(float)
            b = rng.integers(-5, 6, size=m).astype(float)
            got = dtw_distance(a, b, DtwConfig(band_radius=band))
            assert got == dtw_bruteforce(a, b, band=band)

    def test_wide_band_equals_unbanded(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=20)
        b = rng.normal(size=17)
        assert dtw_distance(a, b, DtwConfig(band_radius=50)) == dtw_distance(a, b)


class TestDtwProperties:
    @given(a=short_series)
    def test_self_distance_zero(self, a):
        assert dtw_distance(a, a) == 0.0

    @given(a=short_series, b=short_series)
    def test_nonnegative(self, a, b):
        assert dtw_distance(a, b) >= 0.0

    @given(a=short_series, b=short_series)
    def test_symmetric(self, a, b):
        # equal up to summation order
        assert dtw_distance(a, b) == pytest.approx(dtw_distance(b, a), rel=1e-12)

    @given(a=short_series, b=short_series)
    def test_time_reversal_invariant(self, a, b):
        got = dtw_distance(a[::-1], b[::-1])
        assert dtw_distance(a, b) == pytest.approx(got, rel=1e-12)

    @given(a=st.lists(st.floats(-100, 100), min_size=1, max_size=8),
           b=st.lists(st.floats(-100, 100), min_size=1, max_size=8),
           c=st.floats(-8, 8))
    def test_absolute_distance_homogeneity(self, a, b, c):
        scaled = dtw_distance([c * v for v in a], [c * v for v in b])
        assert scaled == pytest.approx(abs(c) * dtw_distance(a, b), rel=1e-9, abs=1e-9)


class TestDtwErrors:
    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            dtw_distance([], [1.0])
        with pytest.raises(EmptyInputError):
            dtw_distance([1.0], [])

    def test_two_dimensional_input(self):
        with pytest.raises(ShapeError):
            dtw_distance([[1.0, 2.0]], [1.0])

    def test_infeasible_band(self):
        with pytest.raises(ConfigError):
            dtw_distance([1.0] * 10, [1.0] * 2, DtwConfig(band_radius=3))

    def test_bad_distance_name(self):
        with pytest.raises(ConfigError):
            DtwConfig(pointwise_distance="manhattan")

    def test_negative_band(self):
        with pytest.raises(ConfigError):
            DtwConfig(band_radius=-1)


class TestBackends:
    def test_backend_reported(self):
        assert sm.BACKEND in ("compiled", "python")

    def test_pure_python_agrees_with_active_backend(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(1, 30))
            m = int(rng.integers(1, 30))
            a = rng.normal(size=n)
            b = rng.normal(size=m)
            via_api = dtw_distance(a, b)
            via_py = dtw_py(a.tolist(), b.tolist(), False, -1)
            assert via_api == via_py

    def test_pure_python_agrees_banded_and_squared(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            n = int(rng.integers(2, 25))
            a = rng.normal(size=n)
            b = rng.normal(size=n)
            band = int(rng.integers(0, n))
            cfg = DtwConfig(pointwise_distance="squared", band_radius=band)
            assert dtw_distance(a, b, cfg) == dtw_py(a.tolist(), b.tolist(), True, band)


class TestMae:
    def test_examples(self):
        assert mae([1, 2], [1, 4]) == 1.0
        assert mae([0], [5]) == 5.0
        assert mae([3.0, 3.0], [3.0, 3.0]) == 0.0

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            mae([1.0], [1.0, 2.0])
        with pytest.raises(ShapeError):
            mae([], [])

    @given(x=st.lists(finite_floats, min_size=1, max_size=10), c=st.floats(-1e3, 1e3))
    def test_translation_covariant(self, x, c):
        y = [v + 1.0 for v in x]
        shifted = mae([v + c for v in x], [v + c for v in y])
        assert shifted == pytest.approx(mae(x, y), rel=1e-9, abs=1e-9)


class TestRicker:
    def test_center_value_matches_closed_form(self):
        kernel = ricker_wavelet(11, 2.0)
        expected = 2.0 / (math.sqrt(6.0) * math.pi**0.25)
        assert kernel[5] == pytest.approx(expected, rel=1e-12)

    def test_zero_crossings_at_width(self):
        kernel = ricker_wavelet(11, 2.0)
        assert kernel[3] == pytest.approx(0.0, abs=1e-15)
        assert kernel[7] == pytest.approx(0.0, abs=1e-15)

    def test_symmetric(self):
        kernel = ricker_wavelet(21, 3.0)
        assert np.allclose(kernel, kernel[::-1])

    def test_peak_at_center(self):
        kernel = ricker_wavelet(31, 4.0)
        assert int(np.argmax(kernel)) == 15


class TestCwt:
    def test_shape(self):
        x = np.random.default_rng(0).normal(size=30)
        out = cwt(x)
        assert out.shape == (4, 30)

    def test_zero_input_gives_zero_output(self):
        assert np.all(cwt(np.zeros(16)) == 0.0)

    def test_linearity(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=40)
        y = rng.normal(size=40)
        lhs = cwt(x + y)
        rhs = cwt(x) + cwt(y)
        assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-12)

    def test_scalar_homogeneity(self):
        x = np.random.default_rng(6).normal(size=24)
        assert np.allclose(cwt(3.5 * x), 3.5 * cwt(x), rtol=1e-12)

    def test_impulse_maximal_at_impulse(self):
        x = np.zeros(48)
        x[17] = 1.0
        out = cwt(x)
        for row in out:
            assert int(np.argmax(row)) == 17

    def test_too_short_raises(self):
        with pytest.raises(ShapeError):
            cwt(np.ones(3), CwtConfig(widths=(1.0, 4.0)))

    def test_two_dimensional_raises(self):
        with pytest.raises(ShapeError):
            cwt(np.ones((4, 4)))


class TestCwtConfig:
    def test_defaults(self):
        cfg = CwtConfig()
        assert cfg.widths == (1.0, 2.0, 3.0, 4.0)
        assert cfg.resolved_gap_threshold == 1
        assert cfg.min_snr == 1.0
        assert cfg.noise_percentile == 10.0
        assert cfg.min_ridge_length_fraction == 0.25

    def test_gap_threshold_tracks_smallest_width(self):
        assert CwtConfig(widths=(2.5, 5.0)).resolved_gap_threshold == 3
        assert CwtConfig(widths=(2.5, 5.0), gap_threshold=2).resolved_gap_threshold == 2

    def test_validation(self):
        with pytest.raises(ConfigError):
            CwtConfig(widths=())
        with pytest.raises(ConfigError):
            CwtConfig(widths=(2.0, 1.0))
        with pytest.raises(ConfigError):
            CwtConfig(widths=(1.0, 1.0))
        with pytest.raises(ConfigError):
            CwtConfig(widths=(-1.0, 2.0))
        with pytest.raises(ConfigError):
            CwtConfig(wavelet="morlet")
        with pytest.raises(ConfigError):
            CwtConfig(min_snr=0.0)
        with pytest.raises(ConfigError):
            CwtConfig(gap_threshold=0)
        with pytest.raises(ConfigError):
            CwtConfig(min_ridge_length_fraction=0.0)
        with pytest.raises(ConfigError):
            CwtConfig(noise_percentile=100.0)


class TestPeakSet:
    def test_normalizes_to_sorted_unique(self):
        ps = PeakSet((5, 1, 5, 3))
        assert ps.indices == (1, 3, 5)
        assert len(ps) == 3
        assert 3 in ps and 2 not in ps

    def test_shifted(self):
        assert PeakSet((2, 4)).shifted(10).indices == (12, 14)


class TestDetectPeaks:
    def test_flat_signal_empty(self):
        assert detect_peaks_cwt(np.full(48, 2.5)).indices == ()

    def test_single_bump_exactly_one_peak(self):
        x = gaussian_bump(48, 24, 2.0)
        peaks = detect_peaks_cwt(x)
        assert len(peaks) == 1
        assert abs(peaks.indices[0] - 24) <= 1

    def test_two_bumps_exactly_two_peaks(self):
        x = gaussian_bump(48, 10, 2.0) + gaussian_bump(48, 38, 2.0)
        peaks = detect_peaks_cwt(x)
        assert len(peaks) == 2
        assert abs(peaks.indices[0] - 10) <= 1
        assert abs(peaks.indices[1] - 38) <= 1

    def test_noiseless_localization_grid(self):
        # dense-argmax oracle: peak lands within +-1 of the true maximum
        for sigma in (1.0, 1.5, 2.0, 3.0, 4.0):
            for center in (12, 18, 24, 30, 36):
                x = gaussian_bump(48, center, sigma)
                oracle = int(np.argmax(x))
                peaks = detect_peaks_cwt(x)
                assert any(abs(p - oracle) <= 1 for p in peaks), (sigma, center)

    def test_too_short_raises(self):
        with pytest.raises(ShapeError):
            detect_peaks_cwt(np.ones(7))

    @given(data=st.lists(st.floats(-10, 10), min_size=8, max_size=64))
    @settings(max_examples=50, deadline=None)
    def test_indices_always_in_range(self, data):
        peaks = detect_peaks_cwt(np.asarray(data))
        assert all(0 <= p < len(data) for p in peaks)

    def test_peak_indices_relative_to_input(self):
        x = gaussian_bump(64, 40, 2.0)
        peaks = detect_peaks_cwt(x)
        assert any(abs(p - 40) <= 1 for p in peaks)
