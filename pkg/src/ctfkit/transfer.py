"""Damping envelope, aperture, and intensity transfer function.

The chromatic-aberration envelope is E(q) = exp(-(pi*lambda*delta)^2 |q|^4 / 2)
with focal spread delta; it is the only damping source modeled here (partial
coherence, drift, and detector MTF are extension points). The stored transfer
magnitude is t_abs = E * A * |sin chi|: the absolute value keeps only the
amount of information moved per frequency, and the textbook constant factor 2
is dropped so that the transferred-fraction metric stays within [0, 1]. The
complex transfer H = A * E * exp(-i*chi) used by the imaging forward model
retains full physics.
"""

from __future__ import annotations

from dataclasses import dataclass
from weakref import WeakKeyDictionary

import numpy as np

from .aberrations import AberrationSet, MicroscopeConfig, chi
from .grid import FrequencyGrid


@dataclass(frozen=True, eq=False)
class TransferSample:
    """|T(q)| and E(q) sampled on a frequency grid, with provenance.

    Invariants: 0 <= t_abs <= env everywhere, env(0) = 1, env radially
    symmetric and non-increasing in |q|.
    """

    grid: FrequencyGrid
    t_abs: np.ndarray
    env: np.ndarray
    config: MicroscopeConfig
    ab: AberrationSet


def envelope_at(config: MicroscopeConfig, q_norm: np.ndarray) -> np.ndarray:
    """Chromatic damping envelope at the given frequency magnitudes."""
    factor = (np.pi * config.wavelength * config.focal_spread) ** 2 / 2.0
    return np.exp(-factor * q_norm**4)


# Envelope and aperture depend only on (grid, voltage, spread / cutoff);
# memoize per grid so metric batches do not recompute the exponential.
_ENVELOPE_CACHE: "WeakKeyDictionary[FrequencyGrid, dict]" = WeakKeyDictionary()


def envelope(config: MicroscopeConfig, grid: FrequencyGrid) -> np.ndarray:
    cache = _ENVELOPE_CACHE.setdefault(grid, {})
    key = ("env", config.voltage, config.focal_spread)
    if key not in cache:
        env = envelope_at(config, grid.q_norm)
        env.setflags(write=False)
        cache[key] = env
    return cache[key]


def aperture_at(config: MicroscopeConfig, q_norm: np.ndarray) -> np.ndarray:
    """Hard aperture mask: 1 inside the cutoff, 0 outside, 1 everywhere if
    no aperture is configured."""
    if config.aperture_cutoff is None:
        return np.ones_like(q_norm)
    return np.where(q_norm <= config.aperture_cutoff, 1.0, 0.0)


def aperture(config: MicroscopeConfig, grid: FrequencyGrid) -> np.ndarray:
    cache = _ENVELOPE_CACHE.setdefault(grid, {})
    key = ("ap", config.aperture_cutoff)
    if key not in cache:
        ap = aperture_at(config, grid.q_norm)
        ap.setflags(write=False)
        cache[key] = ap
    return cache[key]


def transfer_abs(
    ab: AberrationSet, config: MicroscopeConfig, grid: FrequencyGrid
) -> TransferSample:
    """Sample t_abs(q) = E(q) * A(q) * |sin chi(q)| on the grid."""
    env = envelope(config, grid)
    # chi returns a fresh array; consume it in place
    t = chi(ab, grid, config.wavelength)
    np.sin(t, out=t)
    np.abs(t, out=t)
    t *= env
    if config.aperture_cutoff is not None:
        t *= aperture(config, grid)
    return TransferSample(grid=grid, t_abs=t, env=env, config=config, ab=ab)


def complex_transfer(
    ab: AberrationSet, config: MicroscopeConfig, grid: FrequencyGrid
) -> np.ndarray:
    """Complex transfer H(q) = A(q) * E(q) * exp(-i * chi(q))."""
    phase = chi(ab, grid, config.wavelength)
    return aperture(config, grid) * envelope(config, grid) * np.exp(-1j * phase)
