"""Coherent-mode decomposition of Gaussian Schell-model light and a
mode-filtered Hanbury Brown-Twiss interferometer simulation."""

__version__ = "0.1.0"

from .gsm import (
    KernelParams,
    ModeIndex,
    ModeSpectrum,
    SchellModel,
    derive_kernel_params,
    eigenvalue,
    eigenvalue_ratio,
    g1_kernel,
    hg_mode,
    siegert_g2,
)
from .hbt import (
    DetectionOptics,
    G2Matrix,
    GaussianBucket,
    IdealProjector,
    StepPhaseMask,
    calibrate_mask,
    fiber_convolution,
    filter_overlap,
    g2_ideal,
    g2_matrix_monte_carlo,
    g2_monte_carlo,
    g2_scan,
    matched_focal_length,
    measured_spectrum,
    mode_mismatch_witness,
    partial_intensity,
)
from .metrics import fidelity, g2_distance, schmidt_number, visibility
from .nystrom import GridSpec, compare_to_analytic, discretize_kernel, eigendecompose
from .speckle import (
    EnsembleConfig,
    FieldRealization,
    estimate_g1,
    recommended_cutoff,
    sample_field,
    sample_fields,
    verify_siegert,
)

__all__ = [
    "__version__",
    "SchellModel",
    "KernelParams",
    "ModeIndex",
    "ModeSpectrum",
    "derive_kernel_params",
    "eigenvalue",
    "eigenvalue_ratio",
    "hg_mode",
    "g1_kernel",
    "siegert_g2",
    "GridSpec",
    "discretize_kernel",
    "eigendecompose",
    "compare_to_analytic",
    "EnsembleConfig",
    "FieldRealization",
    "recommended_cutoff",
    "sample_field",
    "sample_fields",
    "estimate_g1",
    "verify_siegert",
    "DetectionOptics",
    "IdealProjector",
    "GaussianBucket",
    "StepPhaseMask",
    "G2Matrix",
    "matched_focal_length",
    "filter_overlap",
    "g2_ideal",
    "g2_monte_carlo",
    "g2_matrix_monte_carlo",
    "g2_scan",
    "partial_intensity",
    "measured_spectrum",
    "fiber_convolution",
    "calibrate_mask",
    "mode_mismatch_witness",
    "fidelity",
    "g2_distance",
    "schmidt_number",
    "visibility",
]
