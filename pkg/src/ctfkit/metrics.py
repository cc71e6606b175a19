"""Information-transfer metrics between imaging conditions.

Two scalar metrics compare conditions through their transfer functions:

* the transferred fraction, sum(|T|^2) / sum(E^2), the share of the
  envelope-limited information a condition actually moves (in [0, 1]);
* the overlap, sum(|T||T'|) / sum(|T|^2), how much of a second (test)
  condition's transfer lands where the first (training) condition transfers.
  The normalization is by the training condition alone, so the measure is
  asymmetric by construction and may exceed 1 when the training transfer is
  weak.

Both are midpoint Riemann sums over a uniform 2D frequency grid; the envelope
makes the integrands negligible beyond the default cutoff. An optional
spectral weight omega(q) replaces |T| by omega*|T| (and E by omega*E) in all
sums symmetrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from weakref import WeakKeyDictionary

import numpy as np

from .aberrations import AberrationSet, MicroscopeConfig
from .grid import FrequencyGrid, make_frequency_grid
from .transfer import TransferSample, transfer_abs

#: Denominator floor below which the overlap metric is reported as degenerate.
DEFAULT_DENOMINATOR_FLOOR = 1e-12

#: The auto grid cutoff is placed where the squared envelope falls to this.
_ENVELOPE_SQ_CUTOFF = 1e-8


class DegenerateTrainingError(ValueError):
    """Overlap denominator underflow: the training condition transfers
    (numerically) nothing, so the ratio is unreliable. Carries the raw sums."""

    def __init__(self, numerator: float, denominator: float, floor: float):
        super().__init__(
            f"training transfer sum {denominator:.3e} is below the floor {floor:.3e} "
            f"(pair numerator {numerator:.3e}); overlap is undefined for a vanishing "
            "training condition"
        )
        self.numerator = numerator
        self.denominator = denominator
        self.floor = floor


@dataclass(frozen=True)
class GridPolicy:
    """Resolution and cutoff used when metric calls build their own grid.

    When q_max is None it is chosen so the squared envelope at the edge is
    below 1e-8: q_max = ((2*ln 1e8) / (pi*lambda*delta)^2)^(1/4). A zero focal
    spread has no cutoff and requires an explicit q_max.
    """

    n: int = 1024
    q_max: float | None = None

    def resolve_q_max(self, config: MicroscopeConfig) -> float:
        if self.q_max is not None:
            return self.q_max
        if config.focal_spread == 0:
            raise ValueError(
                "grid q_max must be given explicitly when focal_spread is zero "
                "(the envelope never decays)"
            )
        scale = (math.pi * config.wavelength * config.focal_spread) ** 2
        return (-2.0 * math.log(_ENVELOPE_SQ_CUTOFF) / scale) ** 0.25

    def build(self, config: MicroscopeConfig) -> FrequencyGrid:
        return make_frequency_grid(self.n, self.resolve_q_max(config))


@dataclass(frozen=True, eq=False)
class SpectralWeight:
    """Non-negative spectral weighting omega, max-normalized to 1.

    Either a radial profile (tabulated, linearly interpolated, held constant
    below the first point and zero beyond the last) or a full 2D field that
    must match the evaluation grid.
    """

    profile_q: np.ndarray | None = None
    profile_w: np.ndarray | None = None
    field: np.ndarray | None = None

    def __post_init__(self) -> None:
        radial = self.profile_q is not None and self.profile_w is not None
        if radial == (self.field is not None):
            raise ValueError("give either a radial profile or a 2D field, not both")
        if radial:
            q = np.asarray(self.profile_q, dtype=float)
            w = np.asarray(self.profile_w, dtype=float)
            if q.ndim != 1 or q.shape != w.shape or q.size < 2:
                raise ValueError("radial profile needs matching 1D q and omega arrays, >= 2 points")
            if np.any(np.diff(q) <= 0):
                raise ValueError("profile q values must be strictly increasing")
            values = w
        else:
            values = np.asarray(self.field, dtype=float)
        if not np.all(np.isfinite(values)):
            raise ValueError("spectral weight must be finite everywhere")
        if np.any(values < 0):
            raise ValueError("spectral weight must be non-negative")
        peak = values.max() if values.size else 0.0
        if peak <= 0:
            raise ValueError("spectral weight must not be identically zero")
        if radial:
            object.__setattr__(self, "profile_q", q)
            object.__setattr__(self, "profile_w", w / peak)
        else:
            object.__setattr__(self, "field", values / peak)

    @classmethod
    def from_table(cls, path) -> "SpectralWeight":
        """Load a two-column text table (q in 1/A, omega dimensionless)."""
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"weight table must have two columns, got {data.shape[1]}")
        return cls(profile_q=data[:, 0], profile_w=data[:, 1])

    def values_on(self, grid: FrequencyGrid) -> np.ndarray:
        if self.field is not None:
            if self.field.shape != grid.shape:
                raise ValueError(
                    f"weight field shape {self.field.shape} does not match grid {grid.shape}"
                )
            return self.field
        return np.interp(grid.q_norm, self.profile_q, self.profile_w, right=0.0)


@dataclass(frozen=True)
class ShiftReport:
    """Metric summary for one training/test condition pair."""

    eps_train: float
    eps_test: float
    sigma: float
    delta_eps: float
    grid_n: int
    grid_q_max: float

    CSV_HEADER = "eps_train,eps_test,sigma,delta_eps,grid_n,grid_qmax_A_inv"

    def csv_row(self) -> str:
        return (
            f"{self.eps_train:.12g},{self.eps_test:.12g},{self.sigma:.12g},"
            f"{self.delta_eps:.12g},{self.grid_n},{self.grid_q_max:.12g}"
        )


def _weight_on(weight: SpectralWeight | None, grid: FrequencyGrid) -> np.ndarray | None:
    return None if weight is None else weight.values_on(grid)


def transfer_for(
    ab: AberrationSet, config: MicroscopeConfig, grid_policy: GridPolicy = GridPolicy()
) -> TransferSample:
    """Sample a condition's transfer on the policy's auto-chosen grid."""
    return transfer_abs(ab, config, grid_policy.build(config))


# The unweighted denominator sum(env^2) depends only on (grid, voltage,
# spread); memoize it so metric batches pay for it once.
_ENV_SQ_SUMS: "WeakKeyDictionary[FrequencyGrid, dict]" = WeakKeyDictionary()


def _env_sq_sum(t: TransferSample) -> float:
    cache = _ENV_SQ_SUMS.setdefault(t.grid, {})
    key = (t.config.voltage, t.config.focal_spread)
    if key not in cache:
        cache[key] = float(np.sum(t.env**2))
    return cache[key]


def epsilon(t: TransferSample, weight: SpectralWeight | None = None) -> float:
    """Fraction of envelope-limited information transferred, in [0, 1]."""
    w = _weight_on(weight, t.grid)
    dq = t.grid.cell_area
    if w is None:
        num = float(np.sum(t.t_abs**2)) * dq
        den = _env_sq_sum(t) * dq
    else:
        num = float(np.sum((w * t.t_abs) ** 2)) * dq
        den = float(np.sum((w * t.env) ** 2)) * dq
    if den <= 0.0:
        raise ValueError("degenerate input: weighted envelope sum vanished")
    return num / den


def sigma(
    t_train: TransferSample,
    t_test: TransferSample,
    weight: SpectralWeight | None = None,
    denominator_floor: float = DEFAULT_DENOMINATOR_FLOOR,
) -> float:
    """Information-transfer overlap of a test condition against a training
    condition; asymmetric (normalized by the training transfer only).

    Raises DegenerateTrainingError when the training sum is below the floor;
    values above 1 are meaningful and returned normally.
    """
    if not t_train.grid.same_sampling(t_test.grid):
        raise ValueError("train and test samples must share the same frequency grid")
    w = _weight_on(weight, t_train.grid)
    dq = t_train.grid.cell_area
    if w is None:
        num = float(np.sum(t_train.t_abs * t_test.t_abs)) * dq
        den = float(np.sum(t_train.t_abs**2)) * dq
    else:
        w2 = w * w
        num = float(np.sum(w2 * t_train.t_abs * t_test.t_abs)) * dq
        den = float(np.sum(w2 * t_train.t_abs**2)) * dq
    if den < denominator_floor:
        raise DegenerateTrainingError(num, den, denominator_floor)
    return num / den


def shift_report(
    ab_train: AberrationSet,
    ab_test: AberrationSet,
    config: MicroscopeConfig,
    grid_policy: GridPolicy = GridPolicy(),
    weight: SpectralWeight | None = None,
    config_test: MicroscopeConfig | None = None,
) -> ShiftReport:
    """Evaluate both conditions on a shared auto-chosen grid and assemble
    (eps_train, eps_test, sigma, delta_eps).

    A separate test-side config (e.g. a different focal spread) is supported;
    each sample carries its own envelope, but note that differing envelopes
    shift the relative scales of the two metrics.
    """
    cfg_test = config if config_test is None else config_test
    if grid_policy.q_max is None:
        q_max = max(grid_policy.resolve_q_max(config), grid_policy.resolve_q_max(cfg_test))
    else:
        q_max = grid_policy.q_max
    grid = make_frequency_grid(grid_policy.n, q_max)
    t_train = transfer_abs(ab_train, config, grid)
    t_test = transfer_abs(ab_test, cfg_test, grid)
    eps_train = epsilon(t_train, weight)
    eps_test = epsilon(t_test, weight)
    s = sigma(t_train, t_test, weight)
    return ShiftReport(
        eps_train=eps_train,
        eps_test=eps_test,
        sigma=s,
        delta_eps=eps_test - eps_train,
        grid_n=grid_policy.n,
        grid_q_max=q_max,
    )
