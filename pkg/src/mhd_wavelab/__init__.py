from __future__ import annotations

from .closed_forms import closed_form_gamma, radial_shapes
from .coefficients import (
    CoefficientTable,
    boundedness_sweep,
    cancellation_sweep,
    coefficient_c,
    coefficient_gamma,
    coefficient_table,
    coefficient_tables,
    fast_self_interaction,
    fd_gamma_oracle,
    grad_lambda,
    identity_residuals,
    sample_ball,
)
from .core.error_codes import LabErrorCode
from .core.exceptions import (
    ArtifactIOError,
    BallExitError,
    CFLViolationError,
    ConfigError,
    DegenerateDirectionError,
    DomainError,
    GeometryError,
    IndexContractError,
    InvalidStateError,
    InvariantFailure,
    LabError,
    NonFiniteStateError,
    NumericalDomainError,
    OracleConvergenceError,
    OracleError,
    ParamsError,
    QuadratureError,
    ShockTimeoutError,
    SingularityError,
    StencilError,
)
from .decomposition import WaveAmplitudes, decompose, integrate_profile, reconstruct
from .eigensystem import (
    EigenSystem,
    Normalization,
    Regime,
    build_matrix,
    duality_residual,
    eigen_analytic,
    eigen_batch,
    eigen_numeric_oracle,
)
from .i18n import MessageCatalog
from .state import PhysParams, State, pressure, sound_speed, wave_speeds

__all__ = [
    # Parameters and states
    "PhysParams",
    "State",
    "pressure",
    "sound_speed",
    "wave_speeds",
    # Eigenstructure
    "Regime",
    "Normalization",
    "EigenSystem",
    "build_matrix",
    "eigen_analytic",
    "eigen_batch",
    "eigen_numeric_oracle",
    "duality_residual",
    # Coefficients
    "CoefficientTable",
    "coefficient_c",
    "coefficient_gamma",
    "coefficient_table",
    "coefficient_tables",
    "closed_form_gamma",
    "radial_shapes",
    "fast_self_interaction",
    "fd_gamma_oracle",
    "grad_lambda",
    "identity_residuals",
    "sample_ball",
    "boundedness_sweep",
    "cancellation_sweep",
    # Decomposition
    "WaveAmplitudes",
    "decompose",
    "reconstruct",
    "integrate_profile",
    # Errors
    "LabErrorCode",
    "LabError",
    "ArtifactIOError",
    "BallExitError",
    "CFLViolationError",
    "ConfigError",
    "DegenerateDirectionError",
    "DomainError",
    "GeometryError",
    "IndexContractError",
    "InvalidStateError",
    "InvariantFailure",
    "NonFiniteStateError",
    "NumericalDomainError",
    "OracleConvergenceError",
    "OracleError",
    "ParamsError",
    "QuadratureError",
    "ShockTimeoutError",
    "SingularityError",
    "StencilError",
    "MessageCatalog",
]

__version__ = "0.1.0"
