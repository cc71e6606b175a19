"""Real- and frequency-space sampling grids.

All sampled transfer functions and metric integrals in this package live on a
uniform Cartesian ``FrequencyGrid``. The grid is centered so that q = 0 falls
exactly on a sample (even sample counts, index n/2), which keeps the DC term
of transfer functions representable. Frequencies are stored in 1/angstrom,
real-space lengths in angstrom.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _validate_count(n: int, name: str) -> None:
    if not isinstance(n, (int, np.integer)):
        raise ValueError(f"{name} must be an integer, got {n!r}")
    if n < 8:
        raise ValueError(f"{name} must be at least 8, got {n}")
    if n % 2 != 0:
        raise ValueError(f"{name} must be even so q = 0 lies on a sample, got {n}")


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Centered 2D grid of spatial frequencies.

    Samples along x are (i - n_x/2) * (2*q_max/n_x) for i in [0, n_x), and
    likewise along y; index (i, j) addresses (row, column) = (q_y, q_x).
    ``q_norm`` and ``q_theta`` are cached per-sample magnitude (1/A) and polar
    angle (radians in (-pi, pi], two-argument arctangent of (q_y, q_x)).
    """

    n_x: int
    n_y: int
    q_max: float
    q_x: np.ndarray = field(init=False, repr=False)
    q_y: np.ndarray = field(init=False, repr=False)
    q_norm: np.ndarray = field(init=False, repr=False)
    q_theta: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        _validate_count(self.n_x, "n_x")
        _validate_count(self.n_y, "n_y")
        if not self.q_max > 0:
            raise ValueError(f"q_max must be positive, got {self.q_max}")
        qx = (np.arange(self.n_x) - self.n_x // 2) * (2.0 * self.q_max / self.n_x)
        qy = (np.arange(self.n_y) - self.n_y // 2) * (2.0 * self.q_max / self.n_y)
        qxx, qyy = np.meshgrid(qx, qy)
        q_norm = np.hypot(qxx, qyy)
        q_theta = np.arctan2(qyy, qxx)
        for name, arr in (("q_x", qx), ("q_y", qy), ("q_norm", q_norm), ("q_theta", q_theta)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_y, self.n_x)

    @property
    def cell_area(self) -> float:
        """Area dq of one grid cell in 1/A^2; constant across the grid."""
        return (2.0 * self.q_max / self.n_x) * (2.0 * self.q_max / self.n_y)

    def same_sampling(self, other: "FrequencyGrid") -> bool:
        return (
            self.n_x == other.n_x
            and self.n_y == other.n_y
            and self.q_max == other.q_max
        )


@dataclass(frozen=True)
class RealGrid:
    """Pixel grid in real space with physical sampling (angstrom per pixel)."""

    n_x: int
    n_y: int
    pixel_size: float

    def __post_init__(self) -> None:
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("sample counts must be positive")
        if not self.pixel_size > 0:
            raise ValueError(f"pixel_size must be positive, got {self.pixel_size}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_y, self.n_x)

    @property
    def extent(self) -> tuple[float, float]:
        """Physical span (x, y) in angstrom."""
        return (self.n_x * self.pixel_size, self.n_y * self.pixel_size)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-corner coordinates (x, y) in angstrom, origin at index 0."""
        return (
            np.arange(self.n_x) * self.pixel_size,
            np.arange(self.n_y) * self.pixel_size,
        )


def make_frequency_grid(n: int, q_max: float) -> FrequencyGrid:
    """Square centered frequency grid with n samples per axis.

    n must be even and at least 8; q_max is the half-extent in 1/A.
    """
    return FrequencyGrid(n_x=n, n_y=n, q_max=q_max)


def conjugate_grid(real: RealGrid) -> FrequencyGrid:
    """Fourier-conjugate frequency grid of a real-space grid.

    The result has q_max = 1/(2*pixel_size) and matching sample counts, so its
    fftshifted samples coincide with ``numpy.fft.fftfreq`` for even counts.
    """
    return FrequencyGrid(n_x=real.n_x, n_y=real.n_y, q_max=1.0 / (2.0 * real.pixel_size))
