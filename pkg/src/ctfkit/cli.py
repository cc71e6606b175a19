"""Command-line surface.

Commands: epsilon, sigma, shift, map-epsilon, map-shift, ctf-profile, sample,
passbands, simulate, calibrate. Machine-readable results go to stdout (or the
--out file); human prose goes to stderr. Every output embeds the fully
resolved configuration as '# '-prefixed INI lines, so any artifact can be
regenerated from its own header.

Exit codes: 0 success, 2 configuration error, 3 degenerate metric,
4 I/O error, 5 numeric/validation error.

CTFKIT_THREADS is the single recognized environment variable (worker count
for map sweeps; defaults to machine parallelism) and never changes numeric
results.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, parse_blobs
from .imaging import (
    apply_dose,
    calibrate_min_contrast,
    gaussian_phantom,
    lattice_phantom,
    simulate,
    write_pgm16,
    write_raw_float32,
)
from .maps import (
    MapAxis,
    MapSpec,
    ctf_profile,
    epsilon_map,
    format_profile_csv,
    format_table_csv,
    shift_map,
    write_table_pgm,
)
from .metrics import DegenerateTrainingError, epsilon, shift_report, transfer_for
from .sampling import (
    conditions_csv,
    jittered_conditions,
    passband_conditions,
    sample_passband_condition,
    substream,
    target_conditions,
)

EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4
EXIT_NUMERIC = 5


def _resolved(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replaced("sampling", "seed", args.seed)
    if getattr(args, "grid_n", None) is not None:
        cfg = cfg.replaced("grid", "n", args.grid_n)
    if getattr(args, "grid_qmax", None) is not None:
        cfg = cfg.replaced("grid", "q_max_A_inv", args.grid_qmax)
    return cfg


def _header(command: str, cfg: RunConfig) -> list[str]:
    return [f"; ctfkit {command} {__version__}", *cfg.header_lines()]


def _ensure_parent(path: str | Path) -> None:
    parent = Path(path).parent
    if parent and not parent.exists():
        parent.mkdir(parents=True, exist_ok=True)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _ensure_parent(out)
        Path(out).write_text(text, encoding="ascii")
        print(f"wrote {out}", file=sys.stderr)


def _commented(lines: list[str]) -> str:
    return "".join(f"# {line}\n" for line in lines)


def _out_base(out: str) -> Path:
    path = Path(out)
    return path.with_suffix("") if path.suffix == ".csv" else path


def _require_out(args: argparse.Namespace, command: str) -> str:
    if args.out is None:
        raise ConfigError(f"{command} requires --out PATH")
    return args.out


def _profile_samples(cfg: RunConfig) -> np.ndarray:
    policy = cfg.grid_policy()
    q_max = policy.resolve_q_max(cfg.microscope())
    return np.linspace(0.0, q_max, cfg.get("grid", "profile_points"))


def _phantom(cfg: RunConfig):
    from .grid import RealGrid

    grid = RealGrid(
        n_x=cfg.get("phantom", "n"),
        n_y=cfg.get("phantom", "n"),
        pixel_size=cfg.get("phantom", "pixel_size_A"),
    )
    if cfg.get("phantom", "kind") == "lattice":
        return lattice_phantom(
            grid,
            period=cfg.get("phantom", "period_A"),
            amplitude=cfg.get("phantom", "amplitude_VA"),
            width=cfg.get("phantom", "width_A"),
        )
    blobs = parse_blobs(cfg.get("phantom", "blobs"))
    if not blobs:
        raise ConfigError("phantom kind 'blobs' needs a non-empty [phantom] blobs value")
    return gaussian_phantom(grid, blobs)


# --- commands -------------------------------------------------------------


def cmd_epsilon(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    config = cfg.microscope()
    ab = cfg.condition().to_aberrations(config.wavelength)
    t = transfer_for(ab, config, cfg.grid_policy())
    value = epsilon(t)
    header = _header("epsilon", cfg)
    sys.stdout.write(_commented(header))
    sys.stdout.write("epsilon,grid_n,grid_qmax_A_inv\n")
    sys.stdout.write(f"{value:.12g},{t.grid.n_x},{t.grid.q_max:.12g}\n")
    if args.out is not None:
        profile = ctf_profile(ab, config, _profile_samples(cfg))
        _emit(format_profile_csv(profile, header), args.out)
        if cfg.get("output", "plot"):
            from .plotting import save_profile_figure

            save_profile_figure(_out_base(args.out).with_suffix(".png"), profile)
    return 0


def _pair_report(args: argparse.Namespace):
    if args.train is None or args.test is None:
        raise ConfigError("this command requires --train PATH and --test PATH")
    cfg_train = load_config(args.train)
    cfg_test = load_config(args.test)
    if getattr(args, "grid_n", None) is not None:
        cfg_train = cfg_train.replaced("grid", "n", args.grid_n)
    if getattr(args, "grid_qmax", None) is not None:
        cfg_train = cfg_train.replaced("grid", "q_max_A_inv", args.grid_qmax)
    mic_train = cfg_train.microscope()
    mic_test = cfg_test.microscope()
    report = shift_report(
        cfg_train.condition().to_aberrations(mic_train.wavelength),
        cfg_test.condition().to_aberrations(mic_test.wavelength),
        mic_train,
        grid_policy=cfg_train.grid_policy(),
        config_test=mic_test,
    )
    header = [
        f"; ctfkit shift {__version__}",
        "; == train config ==",
        *cfg_train.header_lines(),
        "; == test config ==",
        *cfg_test.header_lines(),
    ]
    return report, header


def cmd_sigma(args: argparse.Namespace) -> int:
    report, header = _pair_report(args)
    sys.stdout.write(_commented(header))
    sys.stdout.write("sigma,grid_n,grid_qmax_A_inv\n")
    sys.stdout.write(f"{report.sigma:.12g},{report.grid_n},{report.grid_q_max:.12g}\n")
    return 0


def cmd_shift(args: argparse.Namespace) -> int:
    report, header = _pair_report(args)
    sys.stdout.write(_commented(header))
    sys.stdout.write(report.CSV_HEADER + "\n")
    sys.stdout.write(report.csv_row() + "\n")
    return 0


def cmd_map_epsilon(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    out = _require_out(args, "map-epsilon")
    spec = MapSpec(
        axes=(
            MapAxis("defocus_nm", cfg.get("map", "defocus_min_nm"),
                    cfg.get("map", "defocus_max_nm"), cfg.get("map", "defocus_count")),
            MapAxis("spherical_mm", cfg.get("map", "cs_min_mm"),
                    cfg.get("map", "cs_max_mm"), cfg.get("map", "cs_count")),
        ),
        config=cfg.microscope(),
        base=cfg.condition(),
        policy=cfg.grid_policy(),
    )
    table = epsilon_map(spec)
    header = _header("map-epsilon", cfg)
    _emit(format_table_csv(table, header), out)
    base = _out_base(out)
    if cfg.get("map", "render_pgm"):
        write_table_pgm(base.with_suffix(".pgm"), table, header)
        print(f"wrote {base.with_suffix('.pgm')}", file=sys.stderr)
    if cfg.get("output", "plot"):
        from .plotting import save_map_figure

        save_map_figure(base.with_suffix(".png"), table, label="epsilon")
        print(f"wrote {base.with_suffix('.png')}", file=sys.stderr)
    return 0


def cmd_map_shift(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    out = _require_out(args, "map-shift")
    spec = MapSpec(
        axes=(
            MapAxis("train_defocus_nm", cfg.get("map", "train_min_nm"),
                    cfg.get("map", "train_max_nm"), cfg.get("map", "train_count")),
            MapAxis("test_defocus_nm", cfg.get("map", "test_min_nm"),
                    cfg.get("map", "test_max_nm"), cfg.get("map", "test_count")),
        ),
        config=cfg.microscope(),
        base=cfg.condition(),
        policy=cfg.grid_policy(),
    )
    result = shift_map(spec)
    header = _header("map-shift", cfg)
    base = _out_base(out)
    for suffix, table in (
        ("_sigma", result.sigma),
        ("_delta_eps", result.delta_eps),
        ("_degenerate", result.degenerate),
    ):
        path = base.with_name(base.name + suffix + ".csv")
        _emit(format_table_csv(table, header), str(path))
    if cfg.get("map", "render_pgm"):
        for suffix, table in (("_sigma", result.sigma), ("_delta_eps", result.delta_eps)):
            path = base.with_name(base.name + suffix + ".pgm")
            write_table_pgm(path, table, header)
            print(f"wrote {path}", file=sys.stderr)
    if cfg.get("output", "plot"):
        from .plotting import save_map_figure

        for suffix, table, label in (
            ("_sigma", result.sigma, "sigma"),
            ("_delta_eps", result.delta_eps, "delta epsilon"),
        ):
            path = base.with_name(base.name + suffix + ".png")
            save_map_figure(path, table, label=label)
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_ctf_profile(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    config = cfg.microscope()
    ab = cfg.condition().to_aberrations(config.wavelength)
    profile = ctf_profile(ab, config, _profile_samples(cfg))
    header = _header("ctf-profile", cfg)
    _emit(format_profile_csv(profile, header), args.out)
    if args.out is not None and cfg.get("output", "plot"):
        from .plotting import save_profile_figure

        save_profile_figure(_out_base(args.out).with_suffix(".png"), profile)
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    spec = cfg.sampling_spec()
    count = cfg.get("sampling", "count")
    mode = cfg.get("sampling", "mode")
    if mode == "target":
        conditions = target_conditions(spec, count)
    elif mode == "jittered":
        conditions = [c for _, c in jittered_conditions(
            spec, count, cfg.get("sampling", "jitter_per_target"))]
    else:
        config = cfg.microscope()
        pairs = passband_conditions(cfg.passband_spec(), config.wavelength)
        conditions = [
            sample_passband_condition(pair, spec, substream(spec.seed, (k,)))
            for k, pair in enumerate(pairs)
        ]
    text = conditions_csv(
        conditions, spec.seed,
        [f"# {line}" for line in _header("sample", cfg)],
    )
    _emit(text, args.out)
    return 0


def cmd_passbands(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    pairs = passband_conditions(cfg.passband_spec(), cfg.microscope().wavelength)
    lines = [_commented(_header("passbands", cfg)).rstrip("\n"), "order,defocus_nm,spherical_mm"]
    for p in pairs:
        lines.append(f"{p.order:.12g},{p.defocus_nm:.12g},{p.spherical_mm:.12g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    out = _require_out(args, "simulate")
    config = cfg.microscope()
    obj = _phantom(cfg)
    ab = cfg.condition().to_aberrations(config.wavelength)
    image = simulate(obj, ab, config)
    dose = cfg.get("microscope", "dose_e_per_A2")
    if dose is not None:
        image = apply_dose(image, dose, substream(cfg.get("sampling", "seed"), (0,)))
    base = _out_base(out)
    _ensure_parent(base)
    header = _header("simulate", cfg)
    write_pgm16(image, base.with_suffix(".pgm"), header)
    write_raw_float32(image, base.with_suffix(".raw"))
    print(f"wrote {base.with_suffix('.pgm')} and {base.with_suffix('.raw')}", file=sys.stderr)
    if cfg.get("output", "plot"):
        from .plotting import save_micrograph_figure

        save_micrograph_figure(base.with_suffix(".png"), image)
        print(f"wrote {base.with_suffix('.png')}", file=sys.stderr)
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    config = cfg.microscope()
    obj = _phantom(cfg)
    base_ab = cfg.condition().to_aberrations(config.wavelength)
    offset = calibrate_min_contrast(
        obj, base_ab, config, cfg.get("phantom", "search_half_width_nm")
    )
    sys.stdout.write(_commented(_header("calibrate", cfg)))
    sys.stdout.write("min_contrast_offset_A\n")
    sys.stdout.write(f"{offset:.12g}\n")
    return 0


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run configuration file")
    common.add_argument("--seed", type=int, metavar="N", help="override [sampling] seed")
    common.add_argument("--out", metavar="PATH", help="output file (or base path)")
    common.add_argument("--grid-n", type=int, metavar="N", help="override [grid] n")
    common.add_argument("--grid-qmax", type=float, metavar="F",
                        help="override [grid] q_max_A_inv")

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--train", metavar="PATH", help="training-condition config")
    pair.add_argument("--test", metavar="PATH", help="test-condition config")

    parser = argparse.ArgumentParser(
        prog="ctfkit",
        description="Contrast transfer functions, information-transfer metrics, "
                    "and phase-object image simulation.",
    )
    parser.add_argument("--version", action="version", version=f"ctfkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("epsilon", parents=[common],
                   help="transferred-information fraction of one condition"
                   ).set_defaults(func=cmd_epsilon)
    sub.add_parser("sigma", parents=[common, pair],
                   help="overlap of a test condition against a training condition"
                   ).set_defaults(func=cmd_sigma)
    sub.add_parser("shift", parents=[common, pair],
                   help="full shift report for a train/test pair"
                   ).set_defaults(func=cmd_shift)
    sub.add_parser("map-epsilon", parents=[common],
                   help="epsilon over a (defocus, Cs) sweep"
                   ).set_defaults(func=cmd_map_epsilon)
    sub.add_parser("map-shift", parents=[common],
                   help="sigma and delta-epsilon over defocus pairs"
                   ).set_defaults(func=cmd_map_shift)
    sub.add_parser("ctf-profile", parents=[common],
                   help="radial |T| and envelope profile"
                   ).set_defaults(func=cmd_ctf_profile)
    sub.add_parser("sample", parents=[common],
                   help="draw imaging conditions (target, jittered, or passband mode)"
                   ).set_defaults(func=cmd_sample)
    sub.add_parser("passbands", parents=[common],
                   help="passband-locked (defocus, Cs) pairs"
                   ).set_defaults(func=cmd_passbands)
    sub.add_parser("simulate", parents=[common],
                   help="simulate a phantom micrograph (PGM + raw float32)"
                   ).set_defaults(func=cmd_simulate)
    sub.add_parser("calibrate", parents=[common],
                   help="minimum-contrast defocus offset for a phantom"
                   ).set_defaults(func=cmd_calibrate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"ctfkit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateTrainingError as exc:
        print(f"ctfkit: degenerate metric: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"ctfkit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"ctfkit: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
