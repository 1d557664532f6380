"""Estimation-error lower bounds for massive MIMO-OFDM channel estimation.

The package builds Fisher information matrices for pilot-only and
semi-blind channel estimation under an unstructured (per-coefficient) and
a structured (multipath gains + arrival angles) channel model, inverts
them into error bounds, and sweeps the bounds over SNR and receive-array
shape (uniform linear vs. cylindrical) in seeded Monte-Carlo experiments.
"""

__version__ = "0.1.0"

from .channel import (
    PathParameterSet,
    assemble_channel,
    channel_coefficient,
    channel_matrix,
    draw_path_parameters,
    steering_phase,
)
from .crb import CrbMatrix, crb_scalar, crb_trace, invert_fim, structured_crb_on_h
from .errors import (
    ConfigError,
    DegenerateInformationError,
    InvalidGeometryError,
    MimoCrbError,
    ShapeError,
    SingularCovarianceError,
)
from .experiments import (
    ScenarioConfig,
    SingleRunResult,
    SweepResult,
    SweepRow,
    evaluate_trial,
    run_single,
    sweep_layers,
    sweep_ring,
    sweep_snr,
)
from .fim import (
    FisherMatrix,
    InfoSource,
    JacobianMatrix,
    Parametrization,
    PilotConfig,
    channel_jacobian,
    data_fim_unstructured,
    data_fim_unstructured_naive,
    make_orthogonal_pilots,
    make_qpsk_pilots,
    pilot_fim_unstructured,
    semi_blind_fim,
    structured_fim,
)
from .geometry import (
    ArrayGeometry,
    ArrayKind,
    build_uca,
    build_ucya,
    build_ula,
    uca_radius,
)

__all__ = [
    "ArrayGeometry",
    "ArrayKind",
    "ConfigError",
    "CrbMatrix",
    "DegenerateInformationError",
    "FisherMatrix",
    "InfoSource",
    "InvalidGeometryError",
    "JacobianMatrix",
    "MimoCrbError",
    "Parametrization",
    "PathParameterSet",
    "PilotConfig",
    "ScenarioConfig",
    "ShapeError",
    "SingleRunResult",
    "SingularCovarianceError",
    "SweepResult",
    "SweepRow",
    "assemble_channel",
    "build_uca",
    "build_ucya",
    "build_ula",
    "channel_coefficient",
    "channel_jacobian",
    "channel_matrix",
    "crb_scalar",
    "crb_trace",
    "data_fim_unstructured",
    "data_fim_unstructured_naive",
    "draw_path_parameters",
    "evaluate_trial",
    "invert_fim",
    "make_orthogonal_pilots",
    "make_qpsk_pilots",
    "pilot_fim_unstructured",
    "run_single",
    "semi_blind_fim",
    "steering_phase",
    "structured_crb_on_h",
    "structured_fim",
    "sweep_layers",
    "sweep_ring",
    "sweep_snr",
    "uca_radius",
]
