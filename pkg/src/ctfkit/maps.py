"""Metric landscape sweeps emitted as self-describing data files.

Three sweep engines: the transferred-fraction map over (defocus, Cs), the
overlap / information-difference pair maps over (train defocus, test defocus),
and 1D transfer-function profiles along theta = 0. All outputs are CSV with a
commented header block recording the generating parameters, so each artifact
is regression-diffable; tables can additionally be rendered to 16-bit PGM.

Cells are independent; evaluation may be threaded (CTFKIT_THREADS) but each
cell's value never depends on scheduling, so outputs are byte-identical for
any thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ._constants import A_PER_MM, A_PER_NM
from ._pgm import write_pgm16_array
from .aberrations import AberrationSet, MicroscopeConfig, chi_at
from .grid import FrequencyGrid
from .metrics import DEFAULT_DENOMINATOR_FLOOR, GridPolicy
from .sampling import ImagingCondition
from .transfer import aperture, envelope, envelope_at, aperture_at


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else CTFKIT_THREADS, else machine
    parallelism. Thread count never changes numeric results."""
    if threads is None:
        env = os.environ.get("CTFKIT_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise ValueError(f"thread count must be positive, got {threads}")
    return threads


def _run_rows(task: Callable[[int], None], n_rows: int, threads: int) -> None:
    if threads <= 1:
        for i in range(n_rows):
            task(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(task, range(n_rows)))


@dataclass(frozen=True)
class MapAxis:
    """One swept parameter: name, inclusive range, sample count."""

    name: str
    minimum: float
    maximum: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 2:
            raise ValueError(f"axis {self.name}: count must be >= 2, got {self.count}")
        if not self.minimum < self.maximum:
            raise ValueError(f"axis {self.name}: need min < max")

    def values(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.count)


@dataclass(frozen=True)
class MapSpec:
    """Sweep definition: two axes, fixed microscope config, fixed non-swept
    aberrations, and grid policy overrides."""

    axes: tuple[MapAxis, MapAxis]
    config: MicroscopeConfig
    base: ImagingCondition = ImagingCondition()
    policy: GridPolicy = GridPolicy()


@dataclass(frozen=True, eq=False)
class MapTable:
    """A 2D table with named, physically-valued row/column headers."""

    row_name: str
    row_values: np.ndarray
    col_name: str
    col_values: np.ndarray
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class ShiftMapResult:
    """Overlap and information-difference tables over condition pairs, plus a
    mask marking rows whose training condition was degenerate (those sigma
    cells are NaN sentinels, never fabricated numbers)."""

    sigma: MapTable
    delta_eps: MapTable
    degenerate: MapTable


def _quadratic_quartic_coefficients(
    fixed: ImagingCondition, config: MicroscopeConfig, grid: FrequencyGrid
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """chi of the fixed (non-swept) condition plus the (lambda q)^2 and
    (lambda q)^4 monomials, so swept defocus/Cs cells reduce to fused
    multiply-adds on precomputed arrays."""
    lam = config.wavelength
    lam_q = lam * grid.q_norm
    u2 = lam_q**2
    chi_fixed = chi_at(fixed.to_aberrations(lam), grid.q_norm, grid.q_theta, lam)
    return chi_fixed, u2, u2 * u2


def epsilon_map(spec: MapSpec, threads: int | None = None) -> MapTable:
    """Transferred fraction over a (defocus, spherical) sweep.

    Rows follow the first axis (defocus_nm), columns the second
    (spherical_mm); the base condition supplies all non-swept aberrations.
    """
    names = (spec.axes[0].name, spec.axes[1].name)
    if names != ("defocus_nm", "spherical_mm"):
        raise ValueError(f"epsilon map sweeps (defocus_nm, spherical_mm), got {names}")
    defocus_values = spec.axes[0].values()
    cs_values = spec.axes[1].values()
    config = spec.config
    grid = spec.policy.build(config)
    lam = config.wavelength

    fixed = replace(spec.base, defocus_nm=0.0, spherical_mm=0.0)
    chi_fixed, u2, u4 = _quadratic_quartic_coefficients(fixed, config, grid)
    env = envelope(config, grid)
    ap = aperture(config, grid)
    env_ap = env * ap
    den = float(np.sum(env**2))

    table = np.empty((len(defocus_values), len(cs_values)))

    def fill_row(i: int) -> None:
        c2 = 2.0 * math.pi * (defocus_values[i] * A_PER_NM) / (2.0 * lam)
        for j, cs_mm in enumerate(cs_values):
            c4 = 2.0 * math.pi * (cs_mm * A_PER_MM) / (4.0 * lam)
            t = env_ap * np.abs(np.sin(chi_fixed + c2 * u2 + c4 * u4))
            table[i, j] = float(np.sum(t * t)) / den

    _run_rows(fill_row, len(defocus_values), resolve_threads(threads))
    return MapTable(
        row_name="defocus_nm",
        row_values=defocus_values,
        col_name="spherical_mm",
        col_values=cs_values,
        values=table,
    )


def shift_map(spec: MapSpec, threads: int | None = None) -> ShiftMapResult:
    """Overlap and delta-epsilon over (train defocus, test defocus) pairs.

    All other aberrations are fixed by the base condition; the diagonal of
    the overlap table is identically 1 for non-degenerate rows.
    """
    names = (spec.axes[0].name, spec.axes[1].name)
    if names != ("train_defocus_nm", "test_defocus_nm"):
        raise ValueError(
            f"shift map sweeps (train_defocus_nm, test_defocus_nm), got {names}"
        )
    train_values = spec.axes[0].values()
    test_values = spec.axes[1].values()
    config = spec.config
    grid = spec.policy.build(config)
    lam = config.wavelength

    fixed = replace(spec.base, defocus_nm=0.0)
    chi_fixed, u2, _ = _quadratic_quartic_coefficients(fixed, config, grid)
    env = envelope(config, grid)
    env_ap = env * aperture(config, grid)
    env_den = float(np.sum(env**2))

    def t_abs_for(defocus_nm: float) -> np.ndarray:
        c2 = 2.0 * math.pi * (defocus_nm * A_PER_NM) / (2.0 * lam)
        return env_ap * np.abs(np.sin(chi_fixed + c2 * u2))

    same_axes = len(train_values) == len(test_values) and bool(
        np.all(train_values == test_values)
    )
    test_fields = [t_abs_for(v) for v in test_values]
    train_fields = test_fields if same_axes else [t_abs_for(v) for v in train_values]

    eps_test = np.array([float(np.sum(t * t)) / env_den for t in test_fields])
    eps_train = (
        eps_test if same_axes else np.array([float(np.sum(t * t)) / env_den for t in train_fields])
    )

    dq = grid.cell_area
    n_rows, n_cols = len(train_values), len(test_values)
    sigma_values = np.empty((n_rows, n_cols))
    degenerate = np.zeros((n_rows, n_cols))

    def fill_row(i: int) -> None:
        t_i = train_fields[i]
        den = float(np.sum(t_i * t_i)) * dq
        if den < DEFAULT_DENOMINATOR_FLOOR:
            sigma_values[i, :] = np.nan
            degenerate[i, :] = 1.0
            return
        for j, t_j in enumerate(test_fields):
            sigma_values[i, j] = float(np.sum(t_i * t_j)) * dq / den

    _run_rows(fill_row, n_rows, resolve_threads(threads))
    delta = eps_test[np.newaxis, :] - eps_train[:, np.newaxis]

    def table(vals: np.ndarray) -> MapTable:
        return MapTable(
            row_name="train_defocus_nm",
            row_values=train_values,
            col_name="test_defocus_nm",
            col_values=test_values,
            values=vals,
        )

    return ShiftMapResult(
        sigma=table(sigma_values), delta_eps=table(delta), degenerate=table(degenerate)
    )


def ctf_profile(
    ab: AberrationSet, config: MicroscopeConfig, q_samples: np.ndarray
) -> np.ndarray:
    """Radial transfer profile along theta = 0: columns (q, |T|, E).

    q_samples must be ascending with at least 2 points.
    """
    q = np.asarray(q_samples, dtype=float)
    if q.ndim != 1 or q.size < 2:
        raise ValueError("q_samples must be a 1D array with at least 2 points")
    if np.any(np.diff(q) <= 0):
        raise ValueError("q_samples must be strictly ascending")
    theta = np.zeros_like(q)
    phase = chi_at(ab, q, theta, config.wavelength)
    env = envelope_at(config, q)
    t = env * aperture_at(config, q) * np.abs(np.sin(phase))
    return np.column_stack([q, t, env])


def local_max_indices(values: Sequence[float], tol: float = 0.0) -> list[int]:
    """Interior indices that exceed both neighbors by more than tol."""
    v = np.asarray(values, dtype=float)
    out = []
    for i in range(1, len(v) - 1):
        if v[i] > v[i - 1] + tol and v[i] > v[i + 1] + tol:
            out.append(i)
    return out


def format_table_csv(table: MapTable, header_lines: Sequence[str] = ()) -> str:
    """CSV text: commented header block, then a header row of column values,
    then one row per row value."""
    lines = [f"# {line}" if line else "#" for line in header_lines]
    corner = f"{table.row_name}/{table.col_name}"
    lines.append(corner + "," + ",".join(f"{v:.12g}" for v in table.col_values))
    for rv, row in zip(table.row_values, table.values):
        lines.append(f"{rv:.12g}," + ",".join(f"{x:.12g}" for x in row))
    return "\n".join(lines) + "\n"


def write_table_csv(
    path: str | Path, table: MapTable, header_lines: Sequence[str] = ()
) -> Path:
    path = Path(path)
    path.write_text(format_table_csv(table, header_lines), encoding="ascii")
    return path


def write_table_pgm(
    path: str | Path, table: MapTable, header_lines: Sequence[str] = ()
) -> Path:
    """Grayscale rendering of a map table with scaling limits in a sidecar."""
    path = Path(path)
    lo, hi = write_pgm16_array(path, table.values)
    sidecar = path.with_name(path.name + ".scale.txt")
    lines = [*header_lines, f"value_min = {lo!r}", f"value_max = {hi!r}",
             "levels = 65535", "mapping = linear"]
    sidecar.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def format_profile_csv(profile: np.ndarray, header_lines: Sequence[str] = ()) -> str:
    lines = [f"# {line}" if line else "#" for line in header_lines]
    lines.append("q_A_inv,t_abs,env")
    for q, t, e in profile:
        lines.append(f"{q:.12g},{t:.12g},{e:.12g}")
    return "\n".join(lines) + "\n"
