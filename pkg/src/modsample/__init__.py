"""Modulo (self-reset) ADC simulation and Fourier-Prony signal unfolding."""

from .exceptions import (
    CaptureFormatError,
    DegenerateRootsError,
    FoldConsistencyError,
    ModsampleError,
    OversamplingInsufficientError,
    RecoveryError,
    UndersampledError,
)
from .folding import (
    ModuloConfig,
    NonIdealityConfig,
    ResidueSpec,
    apply_residue,
    centered_modulo,
    choose_order,
    finite_difference,
    fold_ideal,
    perturb_folds,
    residue_spec_from_samples,
    round_beta,
)
from .recovery import (
    RecoveryReport,
    anti_difference,
    calibrated_mse,
    fourier_prony_recover,
    mse,
    optimize_lambda,
    sampling_bounds,
    usf_recover,
)
from .signal_model import (
    SampleVector,
    TrigPolynomial,
    UniformGrid,
    dynamic_range,
    evaluate,
    interpolate,
    quantize,
    sample,
    synthesize_random,
)
from .spectral import (
    ExponentialModel,
    SpectralData,
    amplitudes_ls,
    annihilator,
    band_partition,
    build_toeplitz,
    build_toeplitz_tall,
    estimate_fold_count,
    extract_out_of_band,
    forward_dft,
    inverse_dft,
    matrix_pencil,
    roots_and_instants,
)

__version__ = "0.1.0"
