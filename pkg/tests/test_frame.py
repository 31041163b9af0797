"""Alphabet construction, normalization, kurtosis, and frame drawing."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ofdm_isac.frame import (
    FrameConfig,
    ModulationAlphabet,
    draw_frame,
    kurtosis,
    make_alphabet,
)

# brute-force fourth moments of the square constellations: enumerate the
# integer grid, normalize by its exact mean power, average |x|^4
QAM64_KURTOSIS = 2436 / 1764  # E|x|^4 = 2436 on the grid, (E|x|^2)^2 = 42^2
QAM16_KURTOSIS = 132 / 100


def _grid_points(levels):
    return np.array([a + 1j * b for a in levels for b in levels])


class TestMakeAlphabet:
    def test_qpsk_points(self):
        alph = make_alphabet("qpsk")
        expected = _grid_points([-1, 1]) / np.sqrt(2)
        assert sorted(map(tuple, zip(alph.points.real, alph.points.imag))) == sorted(
            map(tuple, zip(expected.real, expected.imag))
        )

    def test_qam64_grid_power_oracle(self):
        levels = np.array([-7, -5, -3, -1, 1, 3, 5, 7])
        grid = _grid_points(levels)
        # oracle: mean power of the raw grid is exactly 42
        assert np.mean(np.abs(grid) ** 2) == 42
        alph = make_alphabet("qam64")
        assert alph.points.size == 64
        got = np.sort_complex(alph.points)
        expected = np.sort_complex(grid / np.sqrt(42))
        np.testing.assert_allclose(got, expected, atol=1e-12)

    @pytest.mark.parametrize("kind", ["qpsk", "qam16", "qam64"])
    def test_normalization_exact(self, kind):
        alph = make_alphabet(kind)
        assert abs(np.mean(np.abs(alph.points) ** 2) - 1.0) < 1e-12
        assert abs(np.mean(alph.points)) < 1e-12

    def test_custom_scaled(self):
        alph = make_alphabet("custom", [2, -2])
        np.testing.assert_allclose(np.sort_complex(alph.points), [-1, 1], atol=1e-12)

    def test_custom_rejects_empty(self):
        with pytest.raises(ValueError):
            make_alphabet("custom", [])

    def test_custom_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            make_alphabet("custom", [1.0, complex(np.inf, 0)])

    def test_custom_rejects_zero_power(self):
        with pytest.raises(ValueError):
            make_alphabet("custom", [0.0, 0.0])

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_alphabet("qam8")

    @given(
        st.lists(
            st.complex_numbers(
                min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False
            ),
            min_size=1,
            max_size=16,
        )
    )
    def test_custom_always_unit_power(self, points):
        alph = make_alphabet("custom", points)
        assert abs(np.mean(np.abs(alph.points) ** 2) - 1.0) < 1e-9


class TestKurtosis:
    def test_qpsk_exactly_one(self, qpsk):
        assert kurtosis(qpsk) == 1.0

    def test_qam64_brute_force(self, qam64):
        assert kurtosis(qam64) == pytest.approx(QAM64_KURTOSIS, abs=1e-12)

    def test_qam16_brute_force(self):
        assert kurtosis(make_alphabet("qam16")) == pytest.approx(QAM16_KURTOSIS, abs=1e-12)

    def test_two_point_onoff(self):
        # {sqrt(2) e^{j theta}, 0}: unit power, fourth moment (4 + 0) / 2
        theta = 0.83
        alph = make_alphabet("custom", [np.sqrt(2) * np.exp(1j * theta), 0.0])
        assert kurtosis(alph) == pytest.approx(2.0, abs=1e-12)

    def test_unnormalized_alphabet_rejected(self):
        with pytest.raises(ValueError):
            ModulationAlphabet(np.array([2.0 + 0j, -2.0 + 0j]), "custom")


class TestFrameConfig:
    def test_symbol_duration(self):
        cfg = FrameConfig(64, 16, 30e3, 16, 3.5e9)
        assert cfg.symbol_duration == pytest.approx((64 + 16) / (64 * 30e3), rel=1e-15)

    @pytest.mark.parametrize("n, m", [(1, 16), (64, 1), (0, 4)])
    def test_rejects_degenerate_grid(self, n, m):
        with pytest.raises(ValueError):
            FrameConfig(n, m, 30e3, 16, 3.5e9)

    def test_rejects_bad_spacing(self):
        with pytest.raises(ValueError):
            FrameConfig(64, 16, 0.0, 16, 3.5e9)


class TestDrawFrame:
    def test_deterministic_for_seed(self, qpsk):
        cfg = FrameConfig(2, 2, 30e3, 0, 3.5e9)
        a = draw_frame(cfg, qpsk, 1234)
        b = draw_frame(cfg, qpsk, 1234)
        np.testing.assert_array_equal(a.x, b.x)
        assert a.seed == 1234

    def test_different_seeds_differ(self, qpsk):
        cfg = FrameConfig(32, 8, 30e3, 0, 3.5e9)
        a = draw_frame(cfg, qpsk, 1)
        b = draw_frame(cfg, qpsk, 2)
        assert not np.array_equal(a.x, b.x)

    def test_entries_belong_to_alphabet(self, qam64):
        cfg = FrameConfig(16, 4, 30e3, 0, 3.5e9)
        frame = draw_frame(cfg, qam64, 7)
        assert np.isin(frame.x, qam64.points).all()

    def test_shape(self, qpsk):
        cfg = FrameConfig(48, 12, 30e3, 0, 3.5e9)
        assert draw_frame(cfg, qpsk, 0).x.shape == (48, 12)

    def test_qpsk_sample_power(self, qpsk):
        cfg = FrameConfig(1024, 16, 30e3, 0, 3.5e9)
        frame = draw_frame(cfg, qpsk, 99)
        assert np.mean(np.abs(frame.x) ** 2) == pytest.approx(1.0, abs=0.01)

    def test_qam64_sample_fourth_moment(self, qam64):
        cfg = FrameConfig(1024, 16, 30e3, 0, 3.5e9)
        frame = draw_frame(cfg, qam64, 99)
        moment = np.mean(np.abs(frame.x) ** 4)
        assert moment == pytest.approx(kurtosis(qam64), abs=0.02)

    def test_empirical_moments_within_three_sigma(self, qam64):
        cfg = FrameConfig(512, 256, 30e3, 0, 3.5e9)  # 2**17 draws
        power = np.abs(draw_frame(cfg, qam64, 5).x.ravel()) ** 2
        n = power.size
        for samples, target in [(power, 1.0), (power**2, kurtosis(qam64))]:
            bound = 3 * np.std(samples) / np.sqrt(n)
            assert abs(np.mean(samples) - target) < bound
