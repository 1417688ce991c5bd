from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from adaptive_cdrt.channel import (
    BLOCK_SIZE,
    DegenerateChannelError,
    RandomStream,
    draw_channels,
    draw_trial,
    mrt_projection,
)
from adaptive_cdrt.params import (
    ConfigError,
    SystemParams,
    achievable_rate,
    db_to_linear,
    derive_thresholds,
    snr_threshold,
)


def draw_many(params: SystemParams, n: int, seed: int = 0):
    """Concatenate the first ``n`` trials of a run, block by block."""
    parts = []
    for block in range(math.ceil(n / BLOCK_SIZE)):
        size = min(BLOCK_SIZE, n - block * BLOCK_SIZE)
        parts.append(draw_channels(params, RandomStream(seed, block), size))
    return {
        k: np.concatenate([getattr(p, k) for p in parts])
        for k in ("norm2_s1", "norm2_sr", "y_sr", "y_s1", "h_r1", "h_r2")
    }


class TestParams:
    def test_reference_defaults(self, defaults):
        assert (defaults.d_s1, defaults.d_sr, defaults.d_r1, defaults.d_r2) == (10, 15, 15, 10)
        assert defaults.alpha == 2 and defaults.n_antennas == 10
        assert defaults.rho_r_db == defaults.rho_s_db == 20.0
        assert defaults.psi("sr") == 225.0
        assert defaults.mean_gain("s1") == pytest.approx(0.01)

    def test_db_conversion(self):
        assert db_to_linear(20.0) == pytest.approx(100.0)
        assert db_to_linear(0.0) == 1.0

    @pytest.mark.parametrize("rate", [0.05, 0.2, 1.0, 3.0])
    def test_half_and_quarter_slot_thresholds(self, rate):
        assert snr_threshold(rate) == pytest.approx(math.exp(2 * rate) - 1, rel=1e-14)
        assert snr_threshold(rate, prelog=0.25) == pytest.approx(math.exp(4 * rate) - 1, rel=1e-14)
        assert achievable_rate(snr_threshold(rate)) == pytest.approx(rate, rel=1e-14)
        assert achievable_rate(snr_threshold(rate, 0.25), 0.25) == pytest.approx(rate, rel=1e-14)

    def test_derived_thresholds(self, defaults):
        thr = derive_thresholds(defaults)
        t = math.exp(0.4) - 1
        assert thr.theta1 == thr.theta2 == thr.theta3 == pytest.approx(t)
        assert thr.theta == pytest.approx(1 / (1 + t))
        assert thr.tau1 == pytest.approx(t / 100)
        assert thr.tau2 == pytest.approx((math.exp(0.8) - 1) / 100)

    def test_with_rho_sets_both_powers(self, defaults):
        p = defaults.with_rho(35.0)
        assert p.rho_s_db == p.rho_r_db == 35.0

    def test_unequal_powers(self):
        p = SystemParams(rho_s_db=10.0, rho_r_db=30.0)
        assert (p.rho_s, p.rho_r) == pytest.approx((10.0, 1000.0))

    @pytest.mark.parametrize(
        "field,value",
        [
            ("d_s1", 0.0),
            ("d_r2", -3.0),
            ("alpha", -0.5),
            ("n_antennas", 0),
            ("n_antennas", 2.5),
            ("eta", 0.0),
            ("eta", 1.5),
            ("g0", 0.0),
            ("rth_x2", 0.0),
            ("a1_fixed", 1.0),
            ("a1_fixed", 0.0),
            ("rho_s_db", math.inf),
            ("d_sr", math.nan),
            ("ben2_beam", "u2"),
            ("alpha", "2"),
            ("n_antennas", True),
        ],
    )
    def test_rejects_invalid(self, field, value):
        with pytest.raises(ConfigError, match=field):
            SystemParams(**{field: value})


class TestRandomStream:
    def test_same_stream_same_draws(self, defaults):
        a = draw_channels(defaults, RandomStream(7, 3), 100)
        b = draw_channels(defaults, RandomStream(7, 3), 100)
        np.testing.assert_array_equal(a.h_s1, b.h_s1)
        np.testing.assert_array_equal(a.h_r2, b.h_r2)

    def test_blocks_and_seeds_differ(self, defaults):
        base = draw_channels(defaults, RandomStream(7, 3), 50).h_r1
        assert not np.array_equal(base, draw_channels(defaults, RandomStream(7, 4), 50).h_r1)
        assert not np.array_equal(base, draw_channels(defaults, RandomStream(8, 3), 50).h_r1)

    @pytest.mark.parametrize("size", [1, 17, 4096])
    def test_prefix_property(self, defaults, size):
        full = draw_channels(defaults, RandomStream(1, 0))
        part = draw_channels(defaults, RandomStream(1, 0), size)
        np.testing.assert_array_equal(part.h_sr, full.h_sr[:size])
        np.testing.assert_array_equal(part.y_s1, full.y_s1[:size])

    @pytest.mark.parametrize("index", [0, 5, BLOCK_SIZE - 1, BLOCK_SIZE, 3 * BLOCK_SIZE + 11])
    def test_draw_trial_matches_block_row(self, defaults, index):
        block, row = divmod(index, BLOCK_SIZE)
        ch = draw_channels(defaults, RandomStream(2, block))
        one = draw_trial(defaults, 2, index)
        assert len(one) == 1
        np.testing.assert_array_equal(one.h_s1[0], ch.h_s1[row])
        assert one.y_sr[0] == ch.y_sr[row]

    def test_common_random_numbers_across_geometry(self, defaults):
        a = draw_channels(defaults, RandomStream(3, 0), 200)
        moved = defaults.replace(d_sr=20.0, d_s1=12.0, rho_s_db=35.0)
        b = draw_channels(moved, RandomStream(3, 0), 200)
        np.testing.assert_allclose(a.h_sr / math.sqrt(defaults.mean_gain("sr")), b.h_sr / math.sqrt(moved.mean_gain("sr")), rtol=1e-14)
        np.testing.assert_array_equal(a.h_r1, b.h_r1)

    def test_common_random_numbers_across_antennas(self, defaults):
        a = draw_channels(defaults.replace(n_antennas=1), RandomStream(3, 0), 200)
        b = draw_channels(defaults, RandomStream(3, 0), 200)
        np.testing.assert_array_equal(a.h_s1[:, 0], b.h_s1[:, 0])
        np.testing.assert_array_equal(a.h_r2, b.h_r2)

    @pytest.mark.parametrize("kwargs", [{"seed": -1}, {"seed": 0, "block": -1}, {"seed": 0, "block": 2**64}])
    def test_invalid_stream(self, kwargs):
        with pytest.raises(ValueError):
            RandomStream(**kwargs)

    @pytest.mark.parametrize("size", [0, BLOCK_SIZE + 1])
    def test_invalid_size(self, defaults, size):
        with pytest.raises(ValueError):
            draw_channels(defaults, RandomStream(0), size)

    def test_negative_trial_index(self, defaults):
        with pytest.raises(ValueError):
            draw_trial(defaults, 0, -1)


class TestMrtProjection:
    def test_against_explicit_beam(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            a = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            b = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            w = np.conj(a) / np.linalg.norm(a)
            assert mrt_projection(a, b) == pytest.approx(abs(np.dot(b, w)) ** 2, rel=1e-12)

    def test_aimed_receiver_gets_full_gain(self):
        a = np.array([1 + 2j, -0.5j, 3.0])
        assert mrt_projection(a, a) == pytest.approx(np.sum(np.abs(a) ** 2))

    def test_zero_beam_rejected(self):
        with pytest.raises(DegenerateChannelError):
            mrt_projection(np.zeros(3), np.ones(3))


class TestFadingStatistics:
    @pytest.fixture(scope="class")
    @staticmethod
    def draws():
        return draw_many(SystemParams(), 60_000, seed=5)

    def test_norm_is_gamma(self, draws):
        p = SystemParams()
        res = stats.kstest(draws["norm2_s1"], stats.gamma(a=10, scale=1 / p.psi("s1")).cdf)
        assert res.pvalue > 0.01

    @pytest.mark.parametrize("key,link", [("y_sr", "sr"), ("y_s1", "s1")])
    def test_projected_gain_is_exponential(self, draws, key, link):
        res = stats.kstest(draws[key], stats.expon(scale=1 / SystemParams().psi(link)).cdf)
        assert res.pvalue > 0.01

    @pytest.mark.parametrize("key,link", [("h_r1", "r1"), ("h_r2", "r2")])
    def test_single_link_mean(self, draws, key, link):
        g = np.abs(draws[key]) ** 2
        mean = SystemParams().mean_gain(link)
        se = g.std() / math.sqrt(g.size)
        assert abs(g.mean() - mean) < 4 * se

    def test_cauchy_schwarz(self, draws):
        assert np.all(draws["y_sr"] <= draws["norm2_sr"] * (1 + 1e-12))
        assert np.all(draws["y_s1"] <= draws["norm2_s1"] * (1 + 1e-12))

    def test_projection_uncorrelated_with_beam_norm(self, draws):
        r = np.corrcoef(draws["y_sr"], draws["norm2_s1"])[0, 1]
        assert abs(r) < 4 / math.sqrt(draws["y_sr"].size)

    def test_single_antenna_gains_coincide(self):
        ch = draw_channels(SystemParams(n_antennas=1), RandomStream(4, 0))
        np.testing.assert_array_equal(ch.y_sr, ch.norm2_sr)
        np.testing.assert_array_equal(ch.y_s1, ch.norm2_s1)
