"""Tests for the envelope, aperture, and intensity transfer function."""

import numpy as np
import pytest

from ctfkit.aberrations import AberrationSet, MicroscopeConfig, from_physical
from ctfkit.grid import make_frequency_grid
from ctfkit.transfer import (
    aperture,
    complex_transfer,
    envelope,
    envelope_at,
    transfer_abs,
)

CFG = MicroscopeConfig(voltage=300.0, focal_spread=10.0)
LAM = CFG.wavelength


class TestEnvelope:
    def test_no_spread_means_unity(self):
        cfg = MicroscopeConfig(voltage=300.0, focal_spread=0.0)
        grid = make_frequency_grid(16, 2.0)
        np.testing.assert_array_equal(envelope(cfg, grid), 1.0)

    def test_unity_at_dc(self):
        grid = make_frequency_grid(16, 2.0)
        assert envelope(CFG, grid)[8, 8] == 1.0

    def test_oracle_value_at_q1(self):
        # exp(-(pi*lambda*delta)^2 / 2) at q = 1, 300 kV, delta = 10 A
        value = envelope_at(CFG, np.array([1.0]))[0]
        assert value == pytest.approx(0.825908271655709, rel=1e-12)

    def test_radially_symmetric_and_monotone(self):
        grid = make_frequency_grid(64, 3.0)
        env = envelope(CFG, grid)
        # along +x and +y axes from the center: identical and non-increasing
        row = env[32, 32:]
        col = env[32:, 32]
        np.testing.assert_allclose(row, col, rtol=1e-14)
        assert np.all(np.diff(row) <= 0)


class TestAperture:
    def test_default_is_open(self):
        grid = make_frequency_grid(16, 2.0)
        np.testing.assert_array_equal(aperture(CFG, grid), 1.0)

    def test_hard_cutoff(self):
        cfg = MicroscopeConfig(voltage=300.0, focal_spread=10.0, aperture_cutoff=1.0)
        from ctfkit.transfer import aperture_at

        assert aperture_at(cfg, np.array([1.5]))[0] == 0.0
        assert aperture_at(cfg, np.array([0.999]))[0] == 1.0
        assert aperture_at(cfg, np.array([1.0]))[0] == 1.0  # inclusive edge


class TestTransferAbs:
    def test_aberration_free_lens_transfers_nothing(self):
        grid = make_frequency_grid(64, 3.0)
        t = transfer_abs(AberrationSet(), CFG, grid)
        np.testing.assert_array_equal(t.t_abs, 0.0)

    def test_dc_never_transfers(self):
        grid = make_frequency_grid(64, 3.0)
        ab = from_physical(defocus_nm=12.0, spherical_mm=0.05, wavelength=LAM)
        assert transfer_abs(ab, CFG, grid).t_abs[32, 32] == 0.0

    def test_first_zero_of_pure_defocus(self):
        # pi*lambda*q^2*df = pi at q = sqrt(1/(lambda*df)); df = 10 nm = 100 A
        from ctfkit.aberrations import chi_at

        ab = from_physical(defocus_nm=10.0, wavelength=LAM)
        q_zero = 0.7126968442659698
        assert np.sqrt(1.0 / (LAM * 100.0)) == pytest.approx(q_zero, rel=1e-12)
        phase = chi_at(ab, np.array([q_zero]), np.array([0.0]), LAM)[0]
        assert phase == pytest.approx(np.pi, rel=1e-12)

    def test_bounded_by_envelope(self):
        grid = make_frequency_grid(64, 3.0)
        ab = from_physical(defocus_nm=-15.0, astig2_nm=2.0, astig2_angle_rad=0.4,
                           spherical_mm=0.08, wavelength=LAM)
        t = transfer_abs(ab, CFG, grid)
        assert np.all(t.t_abs >= 0.0)
        assert np.all(t.t_abs <= t.env + 1e-15)

    def test_sign_flip_invariance(self):
        grid = make_frequency_grid(32, 3.0)
        ab = from_physical(defocus_nm=8.0, coma_um=0.15, coma_angle_rad=1.0,
                           wavelength=LAM)
        t_pos = transfer_abs(ab, CFG, grid).t_abs
        t_neg = transfer_abs(ab.scaled(-1.0), CFG, grid).t_abs
        np.testing.assert_array_equal(t_pos, t_neg)

    def test_round_aberrations_are_radially_symmetric(self):
        grid = make_frequency_grid(64, 3.0)
        ab = from_physical(defocus_nm=-9.0, spherical_mm=0.03, wavelength=LAM)
        t = transfer_abs(ab, CFG, grid).t_abs
        center = 32
        # equal |q| along the two axes
        np.testing.assert_allclose(t[center, center:], t[center:, center],
                                   rtol=1e-10, atol=1e-13)

    def test_pointwise_at_coincident_samples(self):
        # sample (i, j) of the n grid coincides with (2i, 2j) of the 2n grid
        ab = from_physical(defocus_nm=5.0, astig2_nm=1.5, astig2_angle_rad=0.7,
                           wavelength=LAM)
        coarse = transfer_abs(ab, CFG, make_frequency_grid(32, 3.0)).t_abs
        fine = transfer_abs(ab, CFG, make_frequency_grid(64, 3.0)).t_abs
        np.testing.assert_array_equal(coarse, fine[::2, ::2])


class TestComplexTransfer:
    def test_identity_transfer(self):
        cfg = MicroscopeConfig(voltage=300.0, focal_spread=0.0)
        grid = make_frequency_grid(16, 2.0)
        np.testing.assert_array_equal(complex_transfer(AberrationSet(), cfg, grid), 1.0)

    def test_modulus_is_envelope_times_aperture(self):
        cfg = MicroscopeConfig(voltage=300.0, focal_spread=10.0, aperture_cutoff=2.0)
        grid = make_frequency_grid(32, 3.0)
        ab = from_physical(defocus_nm=-12.0, spherical_mm=0.02, wavelength=LAM)
        h = complex_transfer(ab, cfg, grid)
        np.testing.assert_allclose(
            np.abs(h), envelope(cfg, grid) * aperture(cfg, grid), rtol=1e-12, atol=1e-15
        )

    def test_pure_defocus_closed_form(self):
        grid = make_frequency_grid(32, 3.0)
        df_A = -80.0
        ab = from_physical(defocus_nm=df_A / 10.0, wavelength=LAM)
        h = complex_transfer(ab, CFG, grid)
        expected = envelope(CFG, grid) * np.exp(-1j * np.pi * LAM * grid.q_norm**2 * df_A)
        np.testing.assert_allclose(h, expected, rtol=1e-10, atol=1e-13)
