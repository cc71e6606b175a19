"""Tests for the fail-closed run configuration schema."""

import math

import pytest

from ctfkit.config import (
    ConfigError,
    default_config,
    load_config,
    parse_blobs,
    parse_config_text,
)


class TestParsing:
    def test_empty_config_is_all_defaults(self):
        cfg = parse_config_text("")
        assert cfg.values == default_config().values
        assert cfg.get("microscope", "voltage_kV") == 300.0
        assert cfg.get("sampling", "rotation_jitter_std_rad") == pytest.approx(math.pi / 16)

    def test_section_values_override_defaults(self):
        cfg = parse_config_text("[aberrations]\ndefocus_nm = -12.5\n\n[grid]\nn = 256\n")
        assert cfg.get("aberrations", "defocus_nm") == -12.5
        assert cfg.get("grid", "n") == 256
        assert cfg.get("aberrations", "astig2_nm") == 0.0

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="lens"):
            parse_config_text("[lens]\nx = 1\n")

    def test_unknown_key_rejected_by_name(self):
        with pytest.raises(ConfigError, match="defocus_um"):
            parse_config_text("[aberrations]\ndefocus_um = 3\n")

    def test_bad_value_names_key(self):
        with pytest.raises(ConfigError, match="voltage_kV"):
            parse_config_text("[microscope]\nvoltage_kV = fast\n")

    def test_mode_validated(self):
        with pytest.raises(ConfigError, match="mode"):
            parse_config_text("[sampling]\nmode = random\n")

    def test_physics_validated_at_parse(self):
        with pytest.raises(ConfigError):
            parse_config_text("[microscope]\nvoltage_kV = -300\n")

    def test_keys_match_case_insensitively(self):
        cfg = parse_config_text("[microscope]\nVOLTAGE_KV = 200\n")
        assert cfg.get("microscope", "voltage_kV") == 200.0

    def test_orders_list(self):
        cfg = parse_config_text("[passbands]\norders = 0.5, 1.5\n")
        assert cfg.get("passbands", "orders") == (0.5, 1.5)

    def test_booleans(self):
        assert parse_config_text("[output]\nplot = true\n").get("output", "plot") is True
        assert parse_config_text("[output]\nplot = off\n").get("output", "plot") is False
        with pytest.raises(ConfigError):
            parse_config_text("[output]\nplot = maybe\n")


class TestRoundTrip:
    def test_header_reparses_to_same_values(self):
        cfg = parse_config_text(
            "[microscope]\nvoltage_kV = 200\nfocal_spread_A = 7.3\n"
            "[aberrations]\ndefocus_nm = -8.25\nastig2_angle_rad = 0.0625\n"
            "[sampling]\nseed = 91\n"
        )
        echoed = "\n".join(cfg.header_lines())
        again = parse_config_text(echoed)
        assert again.values == cfg.values

    def test_float_repr_roundtrips_exactly(self):
        cfg = default_config().replaced("aberrations", "defocus_nm", 0.1 + 0.2)
        again = parse_config_text("\n".join(cfg.header_lines()))
        assert again.get("aberrations", "defocus_nm") == 0.1 + 0.2

    def test_comment_lines_tolerated(self):
        text = "; ctfkit map-epsilon 0.1.0\n" + "\n".join(default_config().header_lines())
        assert parse_config_text(text).values == default_config().values


class TestViews:
    def test_microscope_view(self):
        cfg = parse_config_text("[microscope]\nvoltage_kV = 80\naperture_A_inv = 1.5\n")
        mic = cfg.microscope()
        assert mic.voltage == 80.0
        assert mic.aperture_cutoff == 1.5

    def test_condition_view(self):
        cfg = parse_config_text("[aberrations]\ncoma_um = 0.15\ncoma_angle_rad = 0.7\n")
        cond = cfg.condition()
        assert cond.coma_um == 0.15
        assert cond.coma_angle == 0.7

    def test_replaced_rejects_unknown(self):
        with pytest.raises(ConfigError):
            default_config().replaced("grid", "resolution", 5)

    def test_replaced_does_not_mutate(self):
        base = default_config()
        base.replaced("sampling", "seed", 7)
        assert base.get("sampling", "seed") == 0


def test_load_config_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/path.cfg")


def test_load_config_none_is_defaults():
    assert load_config(None).values == default_config().values


def test_parse_blobs():
    blobs = parse_blobs("1.0,2.0,5.0,0.4; 3,4,5,0.5")
    assert blobs == [(1.0, 2.0, 5.0, 0.4), (3.0, 4.0, 5.0, 0.5)]
    assert parse_blobs("") == []
    with pytest.raises(ConfigError):
        parse_blobs("1,2,3")
