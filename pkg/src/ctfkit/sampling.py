"""Random imaging-condition generation.

Protocols implemented:

* target conditions: each aberration magnitude uniform in [0, max] with the
  maxima of the standard sampling table (defocus 15 nm, two-fold astigmatism
  3 nm, coma 0.2 um, three-fold astigmatism 0.2 um, spherical 0.1 mm); each
  azimuthal angle uniform in [0, rotation_max];
* per-image jitter around a target: Gaussian per component, magnitude std =
  jitter_fraction * max (the "1/8th of the maximum magnitudes" rule read as a
  standard deviation), angle std = rotation_jitter_std; jittered magnitudes
  are not clamped to the maxima;
* passband-locked pairs: defocus = -sqrt(order * lambda * Cs) along each
  passband order, Cs linearly spaced up to a cap that keeps both coefficients
  within the table maxima; the remaining aberrations sample uniformly with
  maxima scaled by reduced_scale.

Reproducibility: all draws come from numpy PCG64 generators keyed as
SeedSequence(seed, spawn_key=key). Target condition i uses key (i,); the j-th
jitter of target i uses key (i, j); the passband condition at flat index k
uses key (k,). Magnitudes draw before angles, both in table order (defocus,
astig2, coma, astig3, spherical / astig2, coma, astig3); angles of round
(n = 0) aberrations are never drawn. The stream of conditions is therefore a
pure function of (spec, seed), independent of batching or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from ._constants import A_PER_MM, A_PER_NM, A_PER_UM
from .aberrations import AberrationSet, from_physical

DEFAULT_PASSBAND_ORDERS = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.25, 3.25)

CONDITION_CSV_HEADER = (
    "defocus_nm,astig2_nm,astig2_ang,coma_um,coma_ang,astig3_um,astig3_ang,"
    "spherical_mm,seed,index"
)


@dataclass(frozen=True)
class ImagingCondition:
    """One imaging condition in physical units (angles in radians)."""

    defocus_nm: float = 0.0
    astig2_nm: float = 0.0
    astig2_angle: float = 0.0
    coma_um: float = 0.0
    coma_angle: float = 0.0
    astig3_um: float = 0.0
    astig3_angle: float = 0.0
    spherical_mm: float = 0.0

    def to_aberrations(self, wavelength: float) -> AberrationSet:
        return from_physical(
            defocus_nm=self.defocus_nm,
            astig2_nm=self.astig2_nm,
            astig2_angle_rad=self.astig2_angle,
            coma_um=self.coma_um,
            coma_angle_rad=self.coma_angle,
            astig3_um=self.astig3_um,
            astig3_angle_rad=self.astig3_angle,
            spherical_mm=self.spherical_mm,
            wavelength=wavelength,
        )

    def scaled(self, factor: float) -> "ImagingCondition":
        """Scale every magnitude by a common factor; angles are unchanged."""
        return replace(
            self,
            defocus_nm=self.defocus_nm * factor,
            astig2_nm=self.astig2_nm * factor,
            coma_um=self.coma_um * factor,
            astig3_um=self.astig3_um * factor,
            spherical_mm=self.spherical_mm * factor,
        )

    def csv_row(self, seed: int, index: int) -> str:
        values = (
            self.defocus_nm, self.astig2_nm, self.astig2_angle,
            self.coma_um, self.coma_angle,
            self.astig3_um, self.astig3_angle,
            self.spherical_mm,
        )
        return ",".join(f"{v:.12g}" for v in values) + f",{seed},{index}"


@dataclass(frozen=True)
class SamplingSpec:
    """Maxima and jitter parameters of the condition-sampling protocol."""

    max_defocus_nm: float = 15.0
    max_astig2_nm: float = 3.0
    max_coma_um: float = 0.2
    max_astig3_um: float = 0.2
    max_spherical_mm: float = 0.1
    jitter_fraction: float = 0.125
    rotation_max: float = 0.125
    rotation_jitter_std: float = math.pi / 16.0
    reduced_scale: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("max_defocus_nm", "max_astig2_nm", "max_coma_um",
                     "max_astig3_um", "max_spherical_mm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0.0 <= self.jitter_fraction <= 1.0:
            raise ValueError("jitter_fraction must lie in [0, 1]")
        if self.rotation_max < 0 or self.rotation_jitter_std < 0:
            raise ValueError("rotation parameters must be non-negative")


@dataclass(frozen=True)
class PassbandSpec:
    """Passband orders and the spherical-aberration range sampled per order."""

    orders: tuple[float, ...] = DEFAULT_PASSBAND_ORDERS
    points_per_band: int = 64
    cs_min_um: float = 0.1
    cs_cap_mm: float = 0.1
    defocus_cap_nm: float = 15.0

    def __post_init__(self) -> None:
        if not self.orders or any(n <= 0 for n in self.orders):
            raise ValueError("passband orders must be positive")
        if self.points_per_band < 2:
            raise ValueError("points_per_band must be at least 2")
        if self.cs_min_um <= 0 or self.cs_cap_mm <= 0 or self.defocus_cap_nm <= 0:
            raise ValueError("Cs range and defocus cap must be positive")


@dataclass(frozen=True)
class PassbandPair:
    """A (defocus, Cs) pair locked to one passband order."""

    order: float
    defocus_nm: float
    spherical_mm: float


def substream(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    """Independent generator for one draw index: PCG64 seeded from
    SeedSequence(seed, spawn_key=key)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def sample_target_condition(spec: SamplingSpec, rng: np.random.Generator) -> ImagingCondition:
    """Draw one target condition: magnitudes uniform in [0, max], angles
    uniform in [0, rotation_max]."""
    defocus = rng.uniform(0.0, spec.max_defocus_nm)
    astig2 = rng.uniform(0.0, spec.max_astig2_nm)
    coma = rng.uniform(0.0, spec.max_coma_um)
    astig3 = rng.uniform(0.0, spec.max_astig3_um)
    spherical = rng.uniform(0.0, spec.max_spherical_mm)
    astig2_ang = rng.uniform(0.0, spec.rotation_max)
    coma_ang = rng.uniform(0.0, spec.rotation_max)
    astig3_ang = rng.uniform(0.0, spec.rotation_max)
    return ImagingCondition(
        defocus_nm=defocus,
        astig2_nm=astig2,
        astig2_angle=astig2_ang,
        coma_um=coma,
        coma_angle=coma_ang,
        astig3_um=astig3,
        astig3_angle=astig3_ang,
        spherical_mm=spherical,
    )


def jitter_condition(
    target: ImagingCondition, spec: SamplingSpec, rng: np.random.Generator
) -> ImagingCondition:
    """Per-image Gaussian jitter around a target condition.

    Magnitude stds are jitter_fraction * max per component, angle stds are
    rotation_jitter_std; nothing is clamped afterwards.
    """
    jf = spec.jitter_fraction
    defocus = rng.normal(target.defocus_nm, jf * spec.max_defocus_nm)
    astig2 = rng.normal(target.astig2_nm, jf * spec.max_astig2_nm)
    coma = rng.normal(target.coma_um, jf * spec.max_coma_um)
    astig3 = rng.normal(target.astig3_um, jf * spec.max_astig3_um)
    spherical = rng.normal(target.spherical_mm, jf * spec.max_spherical_mm)
    astig2_ang = rng.normal(target.astig2_angle, spec.rotation_jitter_std)
    coma_ang = rng.normal(target.coma_angle, spec.rotation_jitter_std)
    astig3_ang = rng.normal(target.astig3_angle, spec.rotation_jitter_std)
    return ImagingCondition(
        defocus_nm=defocus,
        astig2_nm=astig2,
        astig2_angle=astig2_ang,
        coma_um=coma,
        coma_angle=coma_ang,
        astig3_um=astig3,
        astig3_angle=astig3_ang,
        spherical_mm=spherical,
    )


def passband_conditions(pb: PassbandSpec, wavelength: float) -> list[PassbandPair]:
    """(defocus, Cs) pairs along each passband order.

    Per order n, Cs is linearly spaced on [cs_min, Cs_max(n)] with
    Cs_max(n) = min(cs_cap, defocus_cap^2 / (lambda * n)), which keeps the
    derived defocus = -sqrt(n * lambda * Cs) within its cap as well. Orders
    whose admissible interval is empty are an error, not silently dropped.
    """
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    cs_min_A = pb.cs_min_um * A_PER_UM
    defocus_cap_A = pb.defocus_cap_nm * A_PER_NM
    pairs: list[PassbandPair] = []
    empty_orders = []
    for order in pb.orders:
        cs_max_A = min(pb.cs_cap_mm * A_PER_MM, defocus_cap_A**2 / (wavelength * order))
        if cs_max_A < cs_min_A:
            empty_orders.append(order)
            continue
        for cs_A in np.linspace(cs_min_A, cs_max_A, pb.points_per_band):
            defocus_A = -math.sqrt(order * wavelength * cs_A)
            pairs.append(
                PassbandPair(
                    order=order,
                    defocus_nm=defocus_A / A_PER_NM,
                    spherical_mm=cs_A / A_PER_MM,
                )
            )
    if empty_orders:
        raise ValueError(
            f"cap rule leaves no admissible Cs interval for orders {empty_orders}"
        )
    return pairs


def sample_passband_condition(
    pair: PassbandPair, spec: SamplingSpec, rng: np.random.Generator
) -> ImagingCondition:
    """Condition with defocus/Cs locked to a passband pair and the remaining
    aberrations sampled uniformly with maxima scaled by reduced_scale."""
    rs = spec.reduced_scale
    astig2 = rng.uniform(0.0, rs * spec.max_astig2_nm)
    coma = rng.uniform(0.0, rs * spec.max_coma_um)
    astig3 = rng.uniform(0.0, rs * spec.max_astig3_um)
    astig2_ang = rng.uniform(0.0, spec.rotation_max)
    coma_ang = rng.uniform(0.0, spec.rotation_max)
    astig3_ang = rng.uniform(0.0, spec.rotation_max)
    return ImagingCondition(
        defocus_nm=pair.defocus_nm,
        astig2_nm=astig2,
        astig2_angle=astig2_ang,
        coma_um=coma,
        coma_angle=coma_ang,
        astig3_um=astig3,
        astig3_angle=astig3_ang,
        spherical_mm=pair.spherical_mm,
    )


def target_conditions(spec: SamplingSpec, count: int, start: int = 0) -> list[ImagingCondition]:
    """Deterministic stream of target conditions at draw indices
    start .. start + count."""
    return [
        sample_target_condition(spec, substream(spec.seed, (i,)))
        for i in range(start, start + count)
    ]


def jittered_conditions(
    spec: SamplingSpec, count: int, per_target: int, start: int = 0
) -> list[tuple[int, ImagingCondition]]:
    """Targets with per-image jitter: per_target jittered conditions for each
    of count targets, tagged with the target index."""
    out: list[tuple[int, ImagingCondition]] = []
    for i in range(start, start + count):
        target = sample_target_condition(spec, substream(spec.seed, (i,)))
        for j in range(per_target):
            out.append((i, jitter_condition(target, spec, substream(spec.seed, (i, j)))))
    return out


def conditions_csv(
    conditions: Iterable[ImagingCondition],
    seed: int,
    header_lines: Sequence[str] = (),
) -> str:
    """Line-oriented CSV for a stream of conditions (one row per condition)."""
    lines = [*header_lines, CONDITION_CSV_HEADER]
    for index, cond in enumerate(conditions):
        lines.append(cond.csv_row(seed, index))
    return "\n".join(lines) + "\n"
