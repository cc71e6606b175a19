"""Declarative run configuration: INI-style sections, fail-closed schema.

Unknown sections or keys are errors, not warnings; a silent nm/um mix-up is
the dominant hazard in this domain, so every physical key carries its unit in
its name and nothing unrecognized is accepted. Every run embeds its fully
resolved configuration (defaults and CLI overrides applied) in output
headers, and that header block re-parses to an equivalent configuration.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .aberrations import MicroscopeConfig
from .metrics import GridPolicy
from .sampling import (
    DEFAULT_PASSBAND_ORDERS,
    ImagingCondition,
    PassbandSpec,
    SamplingSpec,
)


class ConfigError(ValueError):
    """Schema violation in a run configuration."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


_PARSERS = {
    "float": float,
    "int": int,
    "bool": _parse_bool,
    "str": str.strip,
    "floats": _parse_float_list,
}

# Section -> key -> (type name, default). None defaults mean "absent".
SCHEMA: dict[str, dict[str, tuple[str, Any]]] = {
    "microscope": {
        "voltage_kV": ("float", 300.0),
        "focal_spread_A": ("float", 10.0),
        "aperture_A_inv": ("float", None),
        "dose_e_per_A2": ("float", None),
    },
    "aberrations": {
        "defocus_nm": ("float", 0.0),
        "astig2_nm": ("float", 0.0),
        "astig2_angle_rad": ("float", 0.0),
        "coma_um": ("float", 0.0),
        "coma_angle_rad": ("float", 0.0),
        "astig3_um": ("float", 0.0),
        "astig3_angle_rad": ("float", 0.0),
        "spherical_mm": ("float", 0.0),
    },
    "grid": {
        "n": ("int", 1024),
        "q_max_A_inv": ("float", None),
        "profile_points": ("int", 512),
    },
    "sampling": {
        "count": ("int", 16),
        "seed": ("int", 0),
        "mode": ("str", "target"),
        "jitter_per_target": ("int", 1),
        "max_defocus_nm": ("float", 15.0),
        "max_astig2_nm": ("float", 3.0),
        "max_coma_um": ("float", 0.2),
        "max_astig3_um": ("float", 0.2),
        "max_spherical_mm": ("float", 0.1),
        "jitter_fraction": ("float", 0.125),
        "rotation_max_rad": ("float", 0.125),
        "rotation_jitter_std_rad": ("float", math.pi / 16.0),
        "reduced_scale": ("float", 0.2),
    },
    "passbands": {
        "orders": ("floats", DEFAULT_PASSBAND_ORDERS),
        "points_per_band": ("int", 64),
        "cs_min_um": ("float", 0.1),
        "cs_cap_mm": ("float", 0.1),
        "defocus_cap_nm": ("float", 15.0),
    },
    "map": {
        "kind": ("str", "epsilon"),
        "defocus_min_nm": ("float", -30.0),
        "defocus_max_nm": ("float", 30.0),
        "defocus_count": ("int", 61),
        "cs_min_mm": ("float", -0.1),
        "cs_max_mm": ("float", 0.1),
        "cs_count": ("int", 61),
        "train_min_nm": ("float", -25.0),
        "train_max_nm": ("float", 25.0),
        "train_count": ("int", 51),
        "test_min_nm": ("float", -25.0),
        "test_max_nm": ("float", 25.0),
        "test_count": ("int", 51),
        "render_pgm": ("bool", False),
    },
    "phantom": {
        "kind": ("str", "lattice"),
        "n": ("int", 256),
        "pixel_size_A": ("float", 0.25),
        "period_A": ("float", 2.0),
        "amplitude_VA": ("float", 25.0),
        "width_A": ("float", 0.4),
        "blobs": ("str", ""),
        "search_half_width_nm": ("float", 2.0),
    },
    "output": {
        "plot": ("bool", False),
    },
}

_MODES = ("target", "jittered", "passband")
_MAP_KINDS = ("epsilon", "shift")
_PHANTOM_KINDS = ("lattice", "blobs")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration: every schema key has a value."""

    values: dict[str, dict[str, Any]] = field(repr=False, default_factory=dict)

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    def replaced(self, section: str, key: str, value: Any) -> "RunConfig":
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key '{key}' in section [{section}]")
        values = {s: dict(kv) for s, kv in self.values.items()}
        values[section][key] = value
        return RunConfig(values)

    # --- typed views -----------------------------------------------------

    def microscope(self) -> MicroscopeConfig:
        return MicroscopeConfig(
            voltage=self.get("microscope", "voltage_kV"),
            focal_spread=self.get("microscope", "focal_spread_A"),
            aperture_cutoff=self.get("microscope", "aperture_A_inv"),
        )

    def condition(self) -> ImagingCondition:
        ab = self.values["aberrations"]
        return ImagingCondition(
            defocus_nm=ab["defocus_nm"],
            astig2_nm=ab["astig2_nm"],
            astig2_angle=ab["astig2_angle_rad"],
            coma_um=ab["coma_um"],
            coma_angle=ab["coma_angle_rad"],
            astig3_um=ab["astig3_um"],
            astig3_angle=ab["astig3_angle_rad"],
            spherical_mm=ab["spherical_mm"],
        )

    def grid_policy(self) -> GridPolicy:
        return GridPolicy(n=self.get("grid", "n"), q_max=self.get("grid", "q_max_A_inv"))

    def sampling_spec(self) -> SamplingSpec:
        s = self.values["sampling"]
        return SamplingSpec(
            max_defocus_nm=s["max_defocus_nm"],
            max_astig2_nm=s["max_astig2_nm"],
            max_coma_um=s["max_coma_um"],
            max_astig3_um=s["max_astig3_um"],
            max_spherical_mm=s["max_spherical_mm"],
            jitter_fraction=s["jitter_fraction"],
            rotation_max=s["rotation_max_rad"],
            rotation_jitter_std=s["rotation_jitter_std_rad"],
            reduced_scale=s["reduced_scale"],
            seed=s["seed"],
        )

    def passband_spec(self) -> PassbandSpec:
        p = self.values["passbands"]
        return PassbandSpec(
            orders=tuple(p["orders"]),
            points_per_band=p["points_per_band"],
            cs_min_um=p["cs_min_um"],
            cs_cap_mm=p["cs_cap_mm"],
            defocus_cap_nm=p["defocus_cap_nm"],
        )

    # --- echo ------------------------------------------------------------

    def header_lines(self) -> list[str]:
        """INI-style echo of the resolved configuration, suitable for
        commented output headers and for re-parsing."""
        lines: list[str] = []
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key in keys:
                value = self.values[section][key]
                if value is None:
                    continue
                lines.append(f"{key} = {_format_value(value)}")
        return lines


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def default_config() -> RunConfig:
    return RunConfig({s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()})


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse INI-style text against the schema; unknown keys are errors."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    values = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            schema_key = _match_key(section, key)
            if schema_key is None:
                raise ConfigError(f"{source}: unknown key '{key}' in section [{section}]")
            type_name = SCHEMA[section][schema_key][0]
            try:
                values[section][schema_key] = _PARSERS[type_name](raw)
            except ValueError as exc:
                raise ConfigError(
                    f"{source}: key '{schema_key}' in [{section}]: {exc}"
                ) from exc
    cfg = RunConfig(values)
    _validate(cfg, source)
    return cfg


def _match_key(section: str, key: str) -> str | None:
    # configparser lowercases option names; schema keys carry mixed case
    # for unit suffixes, so match case-insensitively.
    for schema_key in SCHEMA[section]:
        if schema_key.lower() == key.lower():
            return schema_key
    return None


def _validate(cfg: RunConfig, source: str) -> None:
    mode = cfg.get("sampling", "mode")
    if mode not in _MODES:
        raise ConfigError(f"{source}: sampling mode must be one of {_MODES}, got '{mode}'")
    kind = cfg.get("map", "kind")
    if kind not in _MAP_KINDS:
        raise ConfigError(f"{source}: map kind must be one of {_MAP_KINDS}, got '{kind}'")
    phantom = cfg.get("phantom", "kind")
    if phantom not in _PHANTOM_KINDS:
        raise ConfigError(
            f"{source}: phantom kind must be one of {_PHANTOM_KINDS}, got '{phantom}'"
        )
    try:
        cfg.microscope()
        cfg.sampling_spec()
        cfg.passband_spec()
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path: str | Path | None) -> RunConfig:
    """Load a config file, or the all-defaults configuration when no path is
    given."""
    if path is None:
        return default_config()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config_text(text, source=str(p))


def parse_blobs(text: str) -> list[tuple[float, float, float, float]]:
    """Parse the [phantom] blobs value: semicolon-separated
    'cx_A,cy_A,amplitude_VA,width_A' quadruples."""
    blobs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [float(p) for p in chunk.split(",")]
        if len(parts) != 4:
            raise ConfigError(f"blob needs 4 numbers (cx,cy,amplitude,width): {chunk!r}")
        blobs.append((parts[0], parts[1], parts[2], parts[3]))
    return blobs
