from .error_codes import EXIT_CODE_MAP, LabErrorCode, get_exit_code
from .exceptions import (
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
    ModuleError,
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
from .renderers import ErrorRenderer, RenderFormat, RenderResult
from .reports import ErrorDetail, ErrorReport

__all__ = [
    "EXIT_CODE_MAP",
    "LabErrorCode",
    "get_exit_code",
    "LabError",
    "ModuleError",
    "ConfigError",
    "ParamsError",
    "InvalidStateError",
    "NumericalDomainError",
    "DegenerateDirectionError",
    "IndexContractError",
    "OracleConvergenceError",
    "OracleError",
    "StencilError",
    "SingularityError",
    "CFLViolationError",
    "BallExitError",
    "NonFiniteStateError",
    "QuadratureError",
    "GeometryError",
    "ShockTimeoutError",
    "DomainError",
    "InvariantFailure",
    "ArtifactIOError",
    "ErrorRenderer",
    "RenderFormat",
    "RenderResult",
    "ErrorDetail",
    "ErrorReport",
]
