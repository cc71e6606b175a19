"""Phase-object HRTEM forward model.

A sample is reduced to the phase it imprints on a unit plane wave,
exp(i * sigma_e * V(r)) with projected potential V in V*A and the
voltage-dependent interaction constant sigma_e. The exit wave is transferred
through the lens in reciprocal space (complex H), and the image is the
squared modulus. A pure phase object under identity transfer is invisible:
the intensity is exactly 1.

The discrete Fourier transform imposes periodic boundaries; phantoms must
decay within the field of view or tile it exactly, otherwise wraparound is
part of the model. Built-in Gaussian phantoms use minimum-image distances and
are therefore periodic-clean by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ._constants import (
    A_PER_METER,
    A_PER_NM,
    ELECTRON_MASS,
    ELEMENTARY_CHARGE,
    PLANCK_H,
    SPEED_OF_LIGHT,
)
from ._pgm import write_pgm16_array
from .aberrations import AberrationSet, MicroscopeConfig, electron_wavelength, from_physical
from .grid import RealGrid, conjugate_grid
from .transfer import complex_transfer


@dataclass(frozen=True, eq=False)
class PhaseObject:
    """Projected potential V(r) in V*A on a real-space pixel grid.

    interaction_constant (rad/(V*A)) is optional; when unset the forward
    model derives it from the microscope voltage.
    """

    grid: RealGrid
    v_proj: np.ndarray
    interaction_constant: float | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.v_proj, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"v_proj shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("v_proj must be finite everywhere")
        object.__setattr__(self, "v_proj", v)


@dataclass(frozen=True, eq=False)
class Micrograph:
    """Simulated image: normalized intensity (vacuum mean 1 at unit incident
    flux), optional dose in e-/A^2 (None = noiseless), and the condition it
    was formed under."""

    grid: RealGrid
    intensity: np.ndarray
    dose: float | None = None
    ab: AberrationSet | None = None
    config: MicroscopeConfig | None = None

    def counts(self) -> np.ndarray:
        """Per-pixel electron counts; requires a dose."""
        if self.dose is None:
            raise ValueError("noiseless micrograph has no counts")
        return self.intensity * (self.dose * self.grid.pixel_size**2)


def interaction_constant(voltage: float) -> float:
    """Relativistic electron-potential interaction constant in rad/(V*A).

    sigma_e = 2*pi*m*e*lambda / h^2 with the relativistic mass m.
    """
    if not voltage > 0:
        raise ValueError(f"voltage must be positive, got {voltage}")
    ev = ELEMENTARY_CHARGE * voltage * 1e3
    gamma = 1.0 + ev / (ELECTRON_MASS * SPEED_OF_LIGHT**2)
    lam_m = electron_wavelength(voltage) / A_PER_METER
    per_vm = (
        2.0 * math.pi * gamma * ELECTRON_MASS * ELEMENTARY_CHARGE * lam_m / PLANCK_H**2
    )
    return per_vm / A_PER_METER


def simulate(obj: PhaseObject, ab: AberrationSet, config: MicroscopeConfig) -> Micrograph:
    """Noiseless image of a phase object under the given lens condition.

    Forward transform of exp(i*sigma_e*V), pointwise multiplication by the
    complex transfer, inverse transform, squared modulus.
    """
    sigma_e = (
        obj.interaction_constant
        if obj.interaction_constant is not None
        else interaction_constant(config.voltage)
    )
    fgrid = conjugate_grid(obj.grid)
    h = np.fft.ifftshift(complex_transfer(ab, config, fgrid))
    psi_exit = np.exp(1j * sigma_e * obj.v_proj)
    psi_image = np.fft.ifft2(np.fft.fft2(psi_exit) * h)
    return Micrograph(
        grid=obj.grid,
        intensity=np.abs(psi_image) ** 2,
        dose=None,
        ab=ab,
        config=config,
    )


def apply_dose(m: Micrograph, dose: float, rng: np.random.Generator) -> Micrograph:
    """Poisson shot noise at the given dose (e-/A^2).

    Per-pixel counts are Poisson with mean dose * pixel_area * intensity; the
    returned micrograph stores counts renormalized back to intensity units.
    """
    if not dose > 0:
        raise ValueError(f"dose must be positive, got {dose}")
    per_pixel = dose * m.grid.pixel_size**2
    counts = rng.poisson(per_pixel * m.intensity).astype(float)
    return replace(m, intensity=counts / per_pixel, dose=dose)


def gaussian_phantom(
    grid: RealGrid, blobs: Sequence[tuple[float, float, float, float]]
) -> PhaseObject:
    """Sum of 2D Gaussian columns; blobs are (center_x, center_y, amplitude,
    width) in (A, A, V*A, A).

    Distances use the minimum-image convention, so the phantom tiles the
    periodic field of view without seams. An empty blob list gives V = 0.
    """
    x, y = grid.coords()
    lx, ly = grid.extent
    v = np.zeros(grid.shape)
    for cx, cy, amplitude, width in blobs:
        if not width > 0:
            raise ValueError(f"blob width must be positive, got {width}")
        dx = (x - cx + lx / 2.0) % lx - lx / 2.0
        dy = (y - cy + ly / 2.0) % ly - ly / 2.0
        r2 = dx[np.newaxis, :] ** 2 + dy[:, np.newaxis] ** 2
        v += amplitude * np.exp(-r2 / (2.0 * width**2))
    return PhaseObject(grid=grid, v_proj=v)


def lattice_phantom(
    grid: RealGrid,
    period: float,
    amplitude: float,
    width: float,
    offset: tuple[float, float] = (0.0, 0.0),
) -> PhaseObject:
    """Gaussian columns on a square lattice, mimicking atomic columns.

    The lattice is generated across the full field of view; choose a period
    that divides the extent for exact periodicity (and Fourier peaks at
    multiples of 1/period).
    """
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    lx, ly = grid.extent
    ox, oy = offset
    blobs = [
        (ox + i * period, oy + j * period, amplitude, width)
        for i in range(int(math.ceil(lx / period)))
        for j in range(int(math.ceil(ly / period)))
    ]
    return gaussian_phantom(grid, blobs)


def _contrast(obj: PhaseObject, ab: AberrationSet, config: MicroscopeConfig) -> float:
    return float(np.std(simulate(obj, ab, config).intensity))


def _with_defocus_offset(
    base_ab: AberrationSet, offset_A: float, wavelength: float
) -> AberrationSet:
    if offset_A == 0.0:
        return base_ab
    return base_ab.merged(
        from_physical(defocus_nm=offset_A / A_PER_NM, wavelength=wavelength)
    )


def calibrate_min_contrast(
    obj: PhaseObject,
    base_ab: AberrationSet,
    config: MicroscopeConfig,
    search_half_width_nm: float,
    coarse_points: int = 64,
    fine_step_A: float = 0.1,
) -> float:
    """Defocus offset (A) minimizing image contrast, by two-stage grid search.

    Stage 1 scans coarse_points offsets across +-search_half_width; stage 2
    rescans the winning coarse cell at fine_step_A resolution (offsets aligned
    to multiples of the step, clipped to the search window). Contrast is the
    standard deviation of the noiseless intensity. Ties break toward the
    smaller |offset|.
    """
    if not search_half_width_nm > 0:
        raise ValueError("search_half_width_nm must be positive")
    half_width = search_half_width_nm * A_PER_NM
    wavelength = config.wavelength

    offsets = list(np.linspace(-half_width, half_width, coarse_points))
    contrasts = [
        _contrast(obj, _with_defocus_offset(base_ab, off, wavelength), config)
        for off in offsets
    ]
    for c in contrasts:
        if not math.isfinite(c):
            raise ValueError("non-finite contrast encountered during coarse scan")
    best = min(range(len(offsets)), key=lambda i: (contrasts[i], abs(offsets[i]), offsets[i]))
    coarse_step = 2.0 * half_width / (coarse_points - 1)

    lo = int(math.ceil(max(offsets[best] - coarse_step, -half_width) / fine_step_A - 1e-9))
    hi = int(math.floor(min(offsets[best] + coarse_step, half_width) / fine_step_A + 1e-9))
    for k in range(lo, hi + 1):
        off = k * fine_step_A
        c = _contrast(obj, _with_defocus_offset(base_ab, off, wavelength), config)
        if not math.isfinite(c):
            raise ValueError("non-finite contrast encountered during fine scan")
        offsets.append(off)
        contrasts.append(c)
    best = min(range(len(offsets)), key=lambda i: (contrasts[i], abs(offsets[i]), offsets[i]))
    return float(offsets[best])


def write_pgm16(m: Micrograph, path: str | Path, header_lines: Sequence[str] = ()) -> Path:
    """16-bit binary PGM, linear min-max scaled; the scaling is recorded in a
    sidecar text file <path>.scale.txt along with any header lines."""
    path = Path(path)
    lo, hi = write_pgm16_array(path, m.intensity)
    sidecar = path.with_name(path.name + ".scale.txt")
    lines = [*header_lines,
             f"intensity_min = {lo!r}",
             f"intensity_max = {hi!r}",
             "levels = 65535",
             "mapping = linear"]
    sidecar.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def write_raw_float32(m: Micrograph, path: str | Path) -> Path:
    """Raw little-endian float32 intensity with the one-line text header
    '<width> <height> <pixel_size_A>'."""
    path = Path(path)
    with open(path, "wb") as f:
        f.write(f"{m.grid.n_x} {m.grid.n_y} {m.grid.pixel_size!r}\n".encode("ascii"))
        f.write(np.ascontiguousarray(m.intensity, dtype="<f4").tobytes())
    return path


def read_raw_float32(path: str | Path) -> tuple[RealGrid, np.ndarray]:
    """Inverse of write_raw_float32."""
    with open(Path(path), "rb") as f:
        header = f.readline().decode("ascii").split()
        n_x, n_y, pixel = int(header[0]), int(header[1]), float(header[2])
        data = np.frombuffer(f.read(), dtype="<f4").reshape(n_y, n_x)
    return RealGrid(n_x=n_x, n_y=n_y, pixel_size=pixel), data.astype(float)
