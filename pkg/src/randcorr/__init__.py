"""Entanglement detection from correlations measured along random local directions."""

__version__ = "0.1.0"

from .correlations import (
    CorrelationTensor,
    correlation_length,
    correlation_tensor,
    correlation_value,
    random_correlations_exact,
    random_correlations_mc,
    reference_frame_correlation,
    two_copy_operator_spectrum,
)
from .errors import DimensionError, DomainError, RandcorrError, ValidationError
from .shotsim import (
    ExperimentConfig,
    ExperimentResult,
    eight_photon_scenario,
    empirical_deviation,
    run_experiment,
    simulate_shots,
)
from .states import (
    DensityMatrix,
    LocalRotationSet,
    PureState,
    apply_local_rotations,
    haar_random_pure,
    make_ghz,
    make_product_state,
    mix_with_white_noise,
)
from .witness import (
    ConfidenceLevel,
    WitnessVerdict,
    chi_cdf,
    chi_density,
    delta_K,
    delta_M,
    delta_product,
    detection_probability,
    ghz_noise_threshold,
    separable_delta_bound,
    single_setting_threshold,
    witness_decide,
)
