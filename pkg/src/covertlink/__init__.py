"""Simulation and bound-verification toolkit for covert AWGN links."""

__version__ = "0.1.0"

from .stats import (
    CI_MULTIPLIER,
    DensitySpec,
    IntervalEstimate,
    QuadratureError,
    binary_entropy,
    kl_gauss_gauss,
    kl_gauss_mixture,
    kl_numeric_1d,
    q_function,
    tv_numeric_1d,
    tv_product_monte_carlo,
)
from .bounds import (
    BPSK,
    GAUSSIAN,
    KNOWN_FLOOR,
    SCHEMES,
    SPARSE,
    UNKNOWN_DECAY,
    BoundValue,
    BudgetInfeasibleError,
    CovertBudget,
    FanoBound,
    FloorModel,
    KeyCost,
    RadiometerCalibration,
    VacuousBoundError,
    achievable_rate,
    covert_power_budget,
    decoding_error_bound,
    fano_converse_bound,
    goodput_bound,
    key_cost,
    known_floor,
    radiometer_beta_bound,
    radiometer_calibration,
    tv_taylor_bound,
    unknown_decay,
)
from .codec import (
    Codebook,
    CodebookSpec,
    EmptyScheduleError,
    SecretKey,
    codebook_from_json,
    codebook_to_json,
    decode_hard_decision,
    decode_min_distance,
    encode,
    generate_codebook,
    key_length,
    random_key,
)
from .detector import (
    DETECTORS,
    DetectionReport,
    DetectionScenario,
    classify_lrt,
    classify_radiometer,
    estimate_detection_errors,
    radiometer_statistic,
    signal_model,
)
from .simulator import (
    ConverseRow,
    ExperimentConfig,
    ReliabilityRecord,
    ScalingResult,
    awgn,
    run_converse_sweep,
    run_reliability,
    run_square_root_scaling,
)

__all__ = [
    "__version__",
    "CI_MULTIPLIER",
    "DensitySpec",
    "IntervalEstimate",
    "QuadratureError",
    "binary_entropy",
    "kl_gauss_gauss",
    "kl_gauss_mixture",
    "kl_numeric_1d",
    "q_function",
    "tv_numeric_1d",
    "tv_product_monte_carlo",
    "BPSK",
    "GAUSSIAN",
    "KNOWN_FLOOR",
    "SCHEMES",
    "SPARSE",
    "UNKNOWN_DECAY",
    "BoundValue",
    "BudgetInfeasibleError",
    "CovertBudget",
    "FanoBound",
    "FloorModel",
    "KeyCost",
    "RadiometerCalibration",
    "VacuousBoundError",
    "achievable_rate",
    "covert_power_budget",
    "decoding_error_bound",
    "fano_converse_bound",
    "goodput_bound",
    "key_cost",
    "known_floor",
    "radiometer_beta_bound",
    "radiometer_calibration",
    "tv_taylor_bound",
    "unknown_decay",
    "Codebook",
    "CodebookSpec",
    "EmptyScheduleError",
    "SecretKey",
    "codebook_from_json",
    "codebook_to_json",
    "decode_hard_decision",
    "decode_min_distance",
    "encode",
    "generate_codebook",
    "key_length",
    "random_key",
    "DETECTORS",
    "DetectionReport",
    "DetectionScenario",
    "classify_lrt",
    "classify_radiometer",
    "estimate_detection_errors",
    "radiometer_statistic",
    "signal_model",
    "ConverseRow",
    "ExperimentConfig",
    "ReliabilityRecord",
    "ScalingResult",
    "awgn",
    "run_converse_sweep",
    "run_reliability",
    "run_square_root_scaling",
]
