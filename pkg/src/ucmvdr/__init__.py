"""Unit-circle MVDR beamforming for uniform linear arrays.

The unit-circle MVDR starts from sample-matrix-inversion MVDR weights, moves
the zeros of their array polynomial radially onto the unit circle (keeping the
main lobe clear) and renormalises to unity look-direction gain.
"""
from ._accel import BACKEND
from .array_model import (
    Scene,
    SnapshotMatrix,
    SourceSpec,
    UlaConfig,
    ensemble_covariance,
    generate_snapshots,
    steering_matrix,
    steering_vector,
)
from .beamformers import (
    Method,
    UcMvdrResult,
    WeightVector,
    cbf_weights,
    mvdr_weights,
    uc_mvdr,
    uc_mvdr_weights,
)
from .covariance import (
    CovarianceKind,
    CovarianceMatrix,
    calibrate_dl_factor,
    diagonal_load,
    sample_covariance,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DegeneratePolynomialError,
    DegenerateZeroError,
    DomainError,
    NumericalError,
    SingularCovarianceError,
    UcmvdrError,
)
from .experiment import (
    DlPolicy,
    ExperimentConfig,
    ExperimentSummary,
    load_config,
    parse_config,
    run_experiment,
    run_trial,
)
from .metrics import (
    BeampatternSamples,
    EmpiricalCdf,
    TrialRecord,
    beampattern,
    empirical_cdf,
    interferer_output_power,
    notch_depth,
    total_output_power,
    white_noise_gain,
)
from .polynomial import (
    ArrayPolynomial,
    find_zeros,
    project_zeros_to_unit_circle,
    weights_to_polynomial,
    zeros_to_coefficients,
)

__version__ = "0.1.0"
