"""ctfkit: contrast transfer functions, information-transfer metrics between
imaging conditions, condition sampling, and phase-object HRTEM simulation."""

__version__ = "0.1.0"

from .aberrations import (
    AberrationSet,
    AberrationTerm,
    MicroscopeConfig,
    chi,
    chi_at,
    electron_wavelength,
    from_physical,
)
from .grid import FrequencyGrid, RealGrid, conjugate_grid, make_frequency_grid
from .imaging import (
    Micrograph,
    PhaseObject,
    apply_dose,
    calibrate_min_contrast,
    gaussian_phantom,
    interaction_constant,
    lattice_phantom,
    simulate,
)
from .maps import MapAxis, MapSpec, MapTable, ctf_profile, epsilon_map, shift_map
from .metrics import (
    DegenerateTrainingError,
    GridPolicy,
    ShiftReport,
    SpectralWeight,
    epsilon,
    shift_report,
    sigma,
    transfer_for,
)
from .sampling import (
    ImagingCondition,
    PassbandSpec,
    SamplingSpec,
    jitter_condition,
    passband_conditions,
    sample_target_condition,
    substream,
)
from .transfer import TransferSample, aperture, complex_transfer, envelope, transfer_abs

__all__ = [
    "AberrationSet",
    "AberrationTerm",
    "DegenerateTrainingError",
    "FrequencyGrid",
    "GridPolicy",
    "ImagingCondition",
    "MapAxis",
    "MapSpec",
    "MapTable",
    "Micrograph",
    "MicroscopeConfig",
    "PassbandSpec",
    "PhaseObject",
    "RealGrid",
    "SamplingSpec",
    "ShiftReport",
    "SpectralWeight",
    "TransferSample",
    "aperture",
    "apply_dose",
    "calibrate_min_contrast",
    "chi",
    "chi_at",
    "complex_transfer",
    "conjugate_grid",
    "ctf_profile",
    "electron_wavelength",
    "envelope",
    "epsilon",
    "epsilon_map",
    "from_physical",
    "gaussian_phantom",
    "interaction_constant",
    "jitter_condition",
    "lattice_phantom",
    "make_frequency_grid",
    "passband_conditions",
    "sample_target_condition",
    "shift_map",
    "shift_report",
    "sigma",
    "simulate",
    "substream",
    "transfer_abs",
    "transfer_for",
]
