"""Tests for the information-transfer metrics."""

from dataclasses import replace

import numpy as np
import pytest

from ctfkit.aberrations import AberrationSet, MicroscopeConfig, from_physical
from ctfkit.grid import make_frequency_grid
from ctfkit.metrics import (
    DegenerateTrainingError,
    GridPolicy,
    SpectralWeight,
    epsilon,
    shift_report,
    sigma,
    transfer_for,
)
from ctfkit.sampling import ImagingCondition, SamplingSpec, sample_target_condition, substream
from ctfkit.transfer import transfer_abs

CFG = MicroscopeConfig(voltage=300.0, focal_spread=10.0)
LAM = CFG.wavelength


def t_defocus(defocus_nm, grid):
    return transfer_abs(from_physical(defocus_nm=defocus_nm, wavelength=LAM), CFG, grid)


class TestGridPolicy:
    def test_auto_qmax_from_envelope(self):
        assert GridPolicy().resolve_q_max(CFG) == pytest.approx(3.1326640073161798, rel=1e-12)

    def test_envelope_is_negligible_at_cutoff(self):
        from ctfkit.transfer import envelope_at

        q_max = GridPolicy().resolve_q_max(CFG)
        assert envelope_at(CFG, np.array([q_max]))[0] ** 2 <= 1e-8

    def test_explicit_qmax_wins(self):
        assert GridPolicy(q_max=2.5).resolve_q_max(CFG) == 2.5

    def test_zero_spread_requires_explicit_qmax(self):
        cfg = MicroscopeConfig(voltage=300.0, focal_spread=0.0)
        with pytest.raises(ValueError):
            GridPolicy().resolve_q_max(cfg)
        assert GridPolicy(q_max=2.0).resolve_q_max(cfg) == 2.0


class TestEpsilon:
    def test_zero_aberrations_transfer_nothing(self):
        grid = make_frequency_grid(256, 3.0)
        assert epsilon(transfer_abs(AberrationSet(), CFG, grid)) == 0.0

    def test_bounded_for_random_conditions(self):
        grid = make_frequency_grid(256, 3.13)
        spec = SamplingSpec(seed=123)
        for i in range(100):
            cond = sample_target_condition(spec, substream(spec.seed, (i,)))
            t = transfer_abs(cond.to_aberrations(LAM), CFG, grid)
            value = epsilon(t)
            assert 0.0 <= value <= 1.0

    def test_rapid_oscillation_limit(self):
        # mean |sin|^2 -> 1/2 under fast CTF oscillation (500 nm defocus)
        t = transfer_for(from_physical(defocus_nm=500.0, wavelength=LAM), CFG)
        assert epsilon(t) == pytest.approx(0.5, abs=0.01)

    def test_passband_beats_same_sign_at_equal_magnitude(self):
        # opposite-sign defocus/Cs forms passbands and transfers more
        cs_mm = 0.025
        df_nm = np.sqrt(1.5 * LAM * cs_mm * 1e7) / 10.0
        policy = GridPolicy(n=512)
        eps_pass = epsilon(transfer_for(
            from_physical(defocus_nm=-df_nm, spherical_mm=cs_mm, wavelength=LAM), CFG, policy))
        eps_same = epsilon(transfer_for(
            from_physical(defocus_nm=+df_nm, spherical_mm=cs_mm, wavelength=LAM), CFG, policy))
        assert eps_pass > eps_same


class TestSigma:
    def test_self_overlap_is_one(self):
        grid = make_frequency_grid(256, 3.13)
        for df in (-12.0, 4.0, 25.0):
            t = t_defocus(df, grid)
            assert abs(sigma(t, t) - 1.0) < 1e-12

    def test_degenerate_training_raises_with_sums(self):
        grid = make_frequency_grid(256, 3.13)
        t_zero = transfer_abs(AberrationSet(), CFG, grid)
        t_big = t_defocus(-10.0, grid)
        with pytest.raises(DegenerateTrainingError) as err:
            sigma(t_zero, t_big)
        assert err.value.denominator == 0.0
        assert err.value.numerator == 0.0
        assert err.value.floor == 1e-12

    def test_weak_training_overlaps_everything(self):
        # training near zero aberration: sigma >= 1 against a generic test
        grid = make_frequency_grid(512, 3.13)
        assert sigma(t_defocus(0.5, grid), t_defocus(-10.0, grid)) >= 1.0

    def test_weak_test_overlaps_nothing(self):
        grid = make_frequency_grid(256, 3.13)
        t_zero = transfer_abs(AberrationSet(), CFG, grid)
        assert sigma(t_defocus(-10.0, grid), t_zero) == 0.0

    def test_defocus_sign_symmetry_pairwise(self):
        # |sin| is even: flipping either condition's defocus sign changes nothing
        grid = make_frequency_grid(128, 3.13)
        values = (-20.0, -10.0, 5.0, 10.0, 20.0)
        cache = {df: t_defocus(df, grid) for df in values}
        cache.update({-df: t_defocus(-df, grid) for df in values})
        for d1 in values:
            for d2 in values:
                ref = sigma(cache[d1], cache[d2])
                assert sigma(cache[-d1], cache[d2]) == pytest.approx(ref, rel=1e-12)
                assert sigma(cache[d1], cache[-d2]) == pytest.approx(ref, rel=1e-12)

    def test_scale_invariance(self):
        grid = make_frequency_grid(128, 3.13)
        t1 = t_defocus(-8.0, grid)
        t2 = t_defocus(12.0, grid)
        ref = sigma(t1, t2)
        for c in (4.0, 3.7):
            s1 = replace(t1, t_abs=c * t1.t_abs)
            s2 = replace(t2, t_abs=c * t2.t_abs)
            assert sigma(s1, s2) == pytest.approx(ref, rel=1e-14)

    def test_grid_mismatch_rejected(self):
        t1 = t_defocus(-8.0, make_frequency_grid(128, 3.13))
        t2 = t_defocus(12.0, make_frequency_grid(256, 3.13))
        with pytest.raises(ValueError):
            sigma(t1, t2)


class TestSpectralWeight:
    def test_profile_normalized_and_interpolated(self):
        w = SpectralWeight(profile_q=np.array([0.0, 1.0, 2.0]),
                           profile_w=np.array([2.0, 1.0, 0.0]))
        grid = make_frequency_grid(64, 3.0)
        values = w.values_on(grid)
        assert values.max() == pytest.approx(1.0)
        # zero beyond the last tabulated point
        assert np.all(values[grid.q_norm > 2.0] == 0.0)
        # linear between samples: normalized profile is 1 - 0.5*q on [0, 1]
        idx = np.unravel_index(np.argmin(np.abs(grid.q_norm - 0.5)), grid.q_norm.shape)
        assert values[idx] == pytest.approx(1.0 - 0.5 * grid.q_norm[idx], rel=1e-6)

    def test_from_table_roundtrip(self, tmp_path):
        table = tmp_path / "weight.txt"
        table.write_text("0.0 1.0\n1.0 0.5\n2.0 0.0\n")
        w = SpectralWeight.from_table(table)
        np.testing.assert_allclose(w.profile_q, [0.0, 1.0, 2.0])
        np.testing.assert_allclose(w.profile_w, [1.0, 0.5, 0.0])

    def test_field_shape_checked(self):
        w = SpectralWeight(field=np.ones((16, 16)))
        with pytest.raises(ValueError):
            w.values_on(make_frequency_grid(32, 1.0))

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            SpectralWeight(profile_q=np.array([0.0, 1.0]), profile_w=np.array([1.0, -0.5]))
        with pytest.raises(ValueError):
            SpectralWeight(field=np.zeros((8, 8)))

    def test_weighted_epsilon_matches_manual_masking(self):
        grid = make_frequency_grid(128, 3.13)
        t = t_defocus(-10.0, grid)
        # top-hat weight via a dense table; compare against direct masking
        q_tab = np.linspace(0.0, 1.5, 2000)
        w = SpectralWeight(profile_q=q_tab, profile_w=np.ones_like(q_tab))
        mask = np.interp(grid.q_norm, q_tab, np.ones_like(q_tab), right=0.0)
        expected = float(np.sum((mask * t.t_abs) ** 2) / np.sum((mask * t.env) ** 2))
        assert epsilon(t, w) == pytest.approx(expected, rel=1e-12)

    def test_weighted_sigma_symmetric_application(self):
        grid = make_frequency_grid(128, 3.13)
        t1 = t_defocus(-10.0, grid)
        t2 = t_defocus(6.0, grid)
        q_tab = np.linspace(0.0, 3.2, 50)
        w_tab = np.exp(-q_tab)
        w = SpectralWeight(profile_q=q_tab, profile_w=w_tab)
        field = np.interp(grid.q_norm, q_tab, w_tab / w_tab.max(), right=0.0)
        expected = float(
            np.sum(field**2 * t1.t_abs * t2.t_abs) / np.sum(field**2 * t1.t_abs**2)
        )
        assert sigma(t1, t2, w) == pytest.approx(expected, rel=1e-12)


class TestShiftReport:
    def test_identical_conditions(self):
        ab = from_physical(defocus_nm=-10.0, wavelength=LAM)
        report = shift_report(ab, ab, CFG, GridPolicy(n=256))
        assert report.sigma == pytest.approx(1.0, abs=1e-12)
        assert report.delta_eps == 0.0
        assert report.eps_train == report.eps_test

    def test_test_near_zero_is_strongly_negative_shift(self):
        ab_train = from_physical(defocus_nm=-10.0, wavelength=LAM)
        report = shift_report(ab_train, AberrationSet(), CFG, GridPolicy(n=512))
        assert report.sigma == 0.0
        assert report.delta_eps == pytest.approx(-report.eps_train)
        assert report.delta_eps < -0.3

    def test_opposite_defocus_overlaps_strongly(self):
        # equal-magnitude opposite-sign defocus: identical |T|, sigma = 1
        ab_train = from_physical(defocus_nm=-10.0, wavelength=LAM)
        ab_test = from_physical(defocus_nm=10.0, wavelength=LAM)
        report = shift_report(ab_train, ab_test, CFG, GridPolicy(n=512))
        assert report.sigma == pytest.approx(1.0, abs=1e-12)
        assert report.delta_eps == pytest.approx(0.0, abs=1e-12)

    def test_grid_provenance_recorded(self):
        ab = from_physical(defocus_nm=5.0, wavelength=LAM)
        report = shift_report(ab, ab, CFG, GridPolicy(n=256))
        assert report.grid_n == 256
        assert report.grid_q_max == pytest.approx(3.1326640073161798, rel=1e-12)

    def test_per_condition_envelopes(self):
        ab = from_physical(defocus_nm=-10.0, wavelength=LAM)
        cfg_test = MicroscopeConfig(voltage=300.0, focal_spread=5.0)
        report = shift_report(ab, ab, CFG, GridPolicy(n=256), config_test=cfg_test)
        # wider test envelope transfers more of its own budget at identical chi
        assert report.delta_eps == report.eps_test - report.eps_train
        assert report.grid_q_max == pytest.approx(GridPolicy().resolve_q_max(cfg_test))

    def test_csv_row_shape(self):
        ab = from_physical(defocus_nm=5.0, wavelength=LAM)
        report = shift_report(ab, ab, CFG, GridPolicy(n=256))
        row = report.csv_row()
        assert len(row.split(",")) == len(report.CSV_HEADER.split(","))


def test_condition_scaling_helper():
    cond = ImagingCondition(defocus_nm=10.0, astig2_nm=2.0, astig2_angle=0.3,
                            spherical_mm=0.05)
    scaled = cond.scaled(0.1)
    assert scaled.defocus_nm == pytest.approx(1.0)
    assert scaled.spherical_mm == pytest.approx(0.005)
    assert scaled.astig2_angle == 0.3
