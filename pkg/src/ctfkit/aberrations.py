"""Lens aberrations and the aberration phase shift.

The phase error of the objective lens is expanded as

    chi(q) = sum_{m,n} (lambda*|q|)^m * c_mag * cos(n*(c_ang - q_theta))

over terms of radial order m and azimuthal order n with dimensionless
magnitudes. Physical coefficients (defocus in nm, spherical aberration in mm,
...) convert to dimensionless magnitudes via c_mag = 2*pi*C_phys / (m*lambda)
with C_phys in angstrom; under this convention a pure defocus contributes
pi*lambda*q^2*df and a pure spherical term (pi/2)*lambda^3*q^4*Cs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from weakref import WeakKeyDictionary

import numpy as np

from ._constants import (
    A_PER_METER,
    A_PER_MM,
    A_PER_NM,
    A_PER_UM,
    ELECTRON_MASS,
    ELEMENTARY_CHARGE,
    PLANCK_H,
    SPEED_OF_LIGHT,
)
from .grid import FrequencyGrid


def electron_wavelength(voltage: float) -> float:
    """Relativistic electron wavelength in angstrom for a voltage in kV."""
    if not voltage > 0:
        raise ValueError(f"voltage must be positive, got {voltage}")
    ev = ELEMENTARY_CHARGE * voltage * 1e3
    p = math.sqrt(
        2.0 * ELECTRON_MASS * ev * (1.0 + ev / (2.0 * ELECTRON_MASS * SPEED_OF_LIGHT**2))
    )
    return PLANCK_H / p * A_PER_METER


@dataclass(frozen=True)
class MicroscopeConfig:
    """Accelerating voltage (kV), chromatic focal spread (A), optional
    aperture cutoff (1/A). The electron wavelength is derived from voltage."""

    voltage: float
    focal_spread: float = 0.0
    aperture_cutoff: float | None = None

    def __post_init__(self) -> None:
        if not self.voltage > 0:
            raise ValueError(f"voltage must be positive, got {self.voltage}")
        if self.focal_spread < 0:
            raise ValueError(f"focal_spread must be non-negative, got {self.focal_spread}")
        if self.aperture_cutoff is not None and self.aperture_cutoff < 0:
            raise ValueError(f"aperture_cutoff must not be negative, got {self.aperture_cutoff}")

    @property
    def wavelength(self) -> float:
        """Electron wavelength in angstrom."""
        return electron_wavelength(self.voltage)


@dataclass(frozen=True)
class AberrationTerm:
    """One expansion term: radial order m, azimuthal order n, dimensionless
    magnitude, azimuthal phase in radians (ignored and stored as 0 for n=0)."""

    m: int
    n: int
    c_mag: float
    c_ang: float = 0.0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"radial order m must be >= 1, got {self.m}")
        if self.n < 0 or self.n > self.m:
            raise ValueError(f"azimuthal order n must satisfy 0 <= n <= m, got (m={self.m}, n={self.n})")
        if (self.m - self.n) % 2 != 0:
            raise ValueError(f"(m - n) must be even, got (m={self.m}, n={self.n})")
        if self.n == 0 and self.c_ang != 0.0:
            object.__setattr__(self, "c_ang", 0.0)


@dataclass(frozen=True)
class AberrationSet:
    """Collection of aberration terms with unique (m, n) pairs.

    The empty set is legal and means chi = 0 everywhere.
    """

    terms: tuple[AberrationTerm, ...] = ()

    def __post_init__(self) -> None:
        terms = tuple(sorted(self.terms, key=lambda t: (t.m, t.n)))
        seen = set()
        for t in terms:
            if (t.m, t.n) in seen:
                raise ValueError(f"duplicate aberration order (m={t.m}, n={t.n})")
            seen.add((t.m, t.n))
        object.__setattr__(self, "terms", terms)

    def scaled(self, factor: float) -> "AberrationSet":
        """Scale every magnitude by a common factor; angles are unchanged."""
        return AberrationSet(
            tuple(AberrationTerm(t.m, t.n, t.c_mag * factor, t.c_ang) for t in self.terms)
        )

    def merged(self, other: "AberrationSet") -> "AberrationSet":
        """Sum of two aberration sets, combining matching (m, n) terms.

        Terms add exactly in the (cos, sin) component representation, so
        chi(merged) == chi(self) + chi(other) pointwise.
        """
        components: dict[tuple[int, int], tuple[float, float]] = {}
        for t in (*self.terms, *other.terms):
            a, b = components.get((t.m, t.n), (0.0, 0.0))
            components[(t.m, t.n)] = (
                a + t.c_mag * math.cos(t.n * t.c_ang),
                b + t.c_mag * math.sin(t.n * t.c_ang),
            )
        merged = []
        for (m, n), (a, b) in components.items():
            if n == 0:
                merged.append(AberrationTerm(m, n, a))
            else:
                merged.append(AberrationTerm(m, n, math.hypot(a, b), math.atan2(b, a) / n))
        return AberrationSet(tuple(merged))


def _physical_term(m: int, n: int, magnitude_A: float, angle: float, wavelength: float) -> AberrationTerm:
    return AberrationTerm(m, n, 2.0 * math.pi * magnitude_A / (m * wavelength), angle)


def from_physical(
    defocus_nm: float = 0.0,
    astig2_nm: float = 0.0,
    astig2_angle_rad: float = 0.0,
    coma_um: float = 0.0,
    coma_angle_rad: float = 0.0,
    astig3_um: float = 0.0,
    astig3_angle_rad: float = 0.0,
    spherical_mm: float = 0.0,
    *,
    wavelength: float,
) -> AberrationSet:
    """Build an aberration set from physical coefficients.

    Orders follow the usual axial-aberration table: defocus (2,0), two-fold
    astigmatism (2,2), axial coma (3,1), three-fold astigmatism (3,3),
    spherical (4,0). Zero-magnitude coefficients emit no term, so all-zero
    input gives the empty set.
    """
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    spec = (
        (2, 0, defocus_nm * A_PER_NM, 0.0),
        (2, 2, astig2_nm * A_PER_NM, astig2_angle_rad),
        (3, 1, coma_um * A_PER_UM, coma_angle_rad),
        (3, 3, astig3_um * A_PER_UM, astig3_angle_rad),
        (4, 0, spherical_mm * A_PER_MM, 0.0),
    )
    terms = tuple(
        _physical_term(m, n, mag_A, ang, wavelength)
        for m, n, mag_A, ang in spec
        if mag_A != 0.0
    )
    return AberrationSet(terms)


def chi_at(
    ab: AberrationSet,
    q_norm: np.ndarray,
    q_theta: np.ndarray,
    wavelength: float,
) -> np.ndarray:
    """Aberration phase shift in radians at the given polar frequency samples."""
    out = np.zeros(np.broadcast(q_norm, q_theta).shape)
    lam_q = wavelength * q_norm
    for t in ab.terms:
        radial = lam_q**t.m * t.c_mag
        if t.n == 0:
            out += radial
        else:
            out += radial * np.cos(t.n * (t.c_ang - q_theta))
    return out


# Per-grid memo of |q|^m and cos/sin(n*theta); these are wavelength- and
# condition-independent, so repeated evaluations on one grid (metric batches,
# map sweeps) skip the expensive transcendentals.
_GRID_FIELDS: "WeakKeyDictionary[FrequencyGrid, dict]" = WeakKeyDictionary()


def _grid_fields(grid: FrequencyGrid) -> dict:
    fields = _GRID_FIELDS.get(grid)
    if fields is None:
        fields = {}
        _GRID_FIELDS[grid] = fields
    return fields


def chi(ab: AberrationSet, grid: FrequencyGrid, wavelength: float) -> np.ndarray:
    """Aberration phase shift chi(q) sampled on a frequency grid.

    chi(0) = 0 always since every term carries a positive power of |q|.
    Identical to chi_at on the grid's polar samples (the azimuthal cosine is
    expanded through the angle-sum identity, exact up to rounding).
    """
    fields = _grid_fields(grid)
    out = None
    for t in ab.terms:
        key = ("pow", t.m)
        if key not in fields:
            fields[key] = grid.q_norm**t.m
        radial = fields[key]
        scale = wavelength**t.m * t.c_mag
        if t.n == 0:
            term = scale * radial
        else:
            ckey, skey = ("cos", t.n), ("sin", t.n)
            if ckey not in fields:
                fields[ckey] = np.cos(t.n * grid.q_theta)
                fields[skey] = np.sin(t.n * grid.q_theta)
            term = (scale * math.cos(t.n * t.c_ang)) * fields[ckey]
            b = scale * math.sin(t.n * t.c_ang)
            if b != 0.0:
                term += b * fields[skey]
            term *= radial
        if out is None:
            out = term
        else:
            out += term
    return out if out is not None else np.zeros(grid.shape)
