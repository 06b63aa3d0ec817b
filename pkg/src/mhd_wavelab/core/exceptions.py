from typing import Any, ClassVar, Dict, Optional, Sequence, Union
from datetime import datetime, timezone
import uuid

from .error_codes import LabErrorCode, get_exit_code


class LabError(Exception):
    """
    Base error class for every failure raised inside the lab.

    It provides standardized error structure with:
    - Error code (from LabErrorCode enum or custom string)
    - Human-readable message
    - Additional details dictionary
    - Provenance (the lab module that raised it)
    - Timestamp and run ID for tracing

    Usage:
        raise LabError(LabErrorCode.BALL_EXIT, "State left the ball", {"sup_norm": 0.2})
    """

    code: LabErrorCode
    message: str
    details: Dict[str, Any]
    module: str
    timestamp: datetime
    run_id: str
    exit_code: int

    def __init__(
        self,
        code: Union[LabErrorCode, str],
        message: str,
        details: Optional[Dict[str, Any]] = None,
        module: str = "lab",
        exit_code: Optional[int] = None,
    ):
        super().__init__(message)
        self.code = code if isinstance(code, LabErrorCode) else LabErrorCode(code)
        self.message = message
        self.details = details or {}
        self.module = module
        self.timestamp = datetime.now(timezone.utc)
        self.run_id = str(uuid.uuid4())

        # Use provided exit code or get from mapping
        self.exit_code = exit_code if exit_code is not None else get_exit_code(self.code)

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary for JSON serialization."""
        return {
            "error": {
                "code": self.code.value,
                "message": self.message,
                "module": self.module,
                "details": self.details,
                "timestamp": self.timestamp.isoformat().replace("+00:00", "Z"),
                "run_id": self.run_id,
            }
        }


class ModuleError(LabError):
    """Base for errors that carry their code and provenance as class metadata."""

    error_code: ClassVar[Union[LabErrorCode, str]] = LabErrorCode.INTERNAL_ERROR
    source_module: ClassVar[str] = "lab"
    title: ClassVar[str] = "Internal error"

    def __init__(
        self,
        message: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
        *,
        code: Union[LabErrorCode, str, None] = None,
        module: Optional[str] = None,
    ):
        super().__init__(
            code or self.error_code,
            message or self.title,
            details,
            module or self.source_module,
        )


class ConfigError(ModuleError):
    """
    Configuration error for unreadable or invalid config input.

    Usage:
        raise ConfigError("Unknown key", section="solver", key="nodez")
    """

    error_code: ClassVar[LabErrorCode] = LabErrorCode.INVALID_CONFIG
    source_module: ClassVar[str] = "cli"
    title: ClassVar[str] = "Invalid configuration"

    def __init__(
        self,
        message: Optional[str] = None,
        section: Optional[str] = None,
        key: Optional[str] = None,
        value: Any = None,
    ):
        details: Dict[str, Any] = {}
        if section:
            details["section"] = section
        if key:
            details["key"] = key
        if value is not None:
            details["value"] = value
        super().__init__(message, details)


class ParamsError(ModuleError):
    """Physical or experiment parameter outside its admissible range."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.INVALID_PARAMS
    source_module: ClassVar[str] = "core-state"
    title: ClassVar[str] = "Invalid parameters"

    def __init__(
        self,
        message: Optional[str] = None,
        field: Optional[str] = None,
        value: Any = None,
        bound: Optional[str] = None,
    ):
        details: Dict[str, Any] = {}
        if field:
            details["field"] = field
        if value is not None:
            details["value"] = value
        if bound:
            details["bound"] = bound
        super().__init__(message, details)


class InvalidStateError(ModuleError):
    """State vector that is non-finite or has non-positive density."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.INVALID_STATE
    source_module: ClassVar[str] = "core-state"
    title: ClassVar[str] = "Invalid state"

    def __init__(
        self,
        message: Optional[str] = None,
        component: Optional[str] = None,
        value: Any = None,
    ):
        details: Dict[str, Any] = {}
        if component:
            details["component"] = component
        if value is not None:
            details["value"] = value
        super().__init__(message, details)


class NumericalDomainError(ModuleError):
    """Discriminant of the wave-speed quadratic is negative beyond rounding."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.NUMERICAL_DOMAIN
    source_module: ClassVar[str] = "core-state"
    title: ClassVar[str] = "Negative discriminant"

    def __init__(self, message: Optional[str] = None, discriminant: Optional[float] = None):
        details: Dict[str, Any] = {}
        if discriminant is not None:
            details["discriminant"] = discriminant
        super().__init__(message, details)


class DegenerateDirectionError(ModuleError):
    """Transverse field below the floor where the eigenbasis needs a direction convention."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.DEGENERATE_DIRECTION
    source_module: ClassVar[str] = "eigensystem"
    title: ClassVar[str] = "Degenerate transverse field direction"

    def __init__(
        self,
        message: Optional[str] = None,
        h_perp_sq: Optional[float] = None,
        h_floor: Optional[float] = None,
    ):
        details: Dict[str, Any] = {}
        if h_perp_sq is not None:
            details["h_perp_sq"] = h_perp_sq
        if h_floor is not None:
            details["h_floor"] = h_floor
        super().__init__(message, details)


class IndexContractError(ModuleError):
    """Family indices outside 1..n or violating a formula's index contract."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.INDEX_CONTRACT
    source_module: ClassVar[str] = "coefficients"
    title: ClassVar[str] = "Index contract violated"

    def __init__(
        self,
        message: Optional[str] = None,
        indices: Optional[Sequence[int]] = None,
        family_count: Optional[int] = None,
        module: Optional[str] = None,
    ):
        details: Dict[str, Any] = {}
        if indices is not None:
            details["indices"] = list(indices)
        if family_count is not None:
            details["family_count"] = family_count
        super().__init__(message, details, module=module)


class OracleError(ModuleError):
    """The independent numeric eigenvalue routine failed."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.ORACLE_FAILURE
    source_module: ClassVar[str] = "eigensystem"
    title: ClassVar[str] = "Numeric oracle failed"

    def __init__(self, message: Optional[str] = None, reason: Optional[str] = None):
        details: Dict[str, Any] = {}
        if reason:
            details["reason"] = reason
        super().__init__(message, details)


class OracleConvergenceError(ModuleError):
    """Finite-difference estimates at h and h/2 disagree beyond the tolerance."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.ORACLE_NOT_CONVERGED
    source_module: ClassVar[str] = "coefficients"
    title: ClassVar[str] = "Finite-difference oracle did not converge"

    def __init__(
        self,
        message: Optional[str] = None,
        step: Optional[float] = None,
        disagreement: Optional[float] = None,
        tolerance: Optional[float] = None,
    ):
        details: Dict[str, Any] = {}
        if step is not None:
            details["step"] = step
        if disagreement is not None:
            details["disagreement"] = disagreement
        if tolerance is not None:
            details["tolerance"] = tolerance
        super().__init__(message, details)


class StencilError(ModuleError):
    """Finite-difference stencil crosses a change in eigenvalue ordering."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.STENCIL_ERROR
    source_module: ClassVar[str] = "coefficients"
    title: ClassVar[str] = "Non-smooth stencil"

    def __init__(
        self,
        message: Optional[str] = None,
        step: Optional[float] = None,
        direction: Optional[int] = None,
    ):
        details: Dict[str, Any] = {}
        if step is not None:
            details["step"] = step
        if direction is not None:
            details["direction"] = direction
        super().__init__(message, details)


class SingularityError(ModuleError):
    """A coefficient evaluated to a non-finite value during a sweep."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.SINGULARITY_DETECTED
    source_module: ClassVar[str] = "coefficients"
    title: ClassVar[str] = "Singular coefficient detected"

    def __init__(
        self,
        message: Optional[str] = None,
        sample: Optional[int] = None,
        state: Optional[Sequence[float]] = None,
    ):
        details: Dict[str, Any] = {}
        if sample is not None:
            details["sample"] = sample
        if state is not None:
            details["state"] = [float(v) for v in state]
        super().__init__(message, details)


class CFLViolationError(ModuleError):
    """Requested time step exceeds the CFL limit."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.CFL_VIOLATION
    source_module: ClassVar[str] = "solver"
    title: ClassVar[str] = "CFL condition violated"

    def __init__(
        self,
        message: Optional[str] = None,
        dt: Optional[float] = None,
        dt_max: Optional[float] = None,
    ):
        details: Dict[str, Any] = {}
        if dt is not None:
            details["dt"] = dt
        if dt_max is not None:
            details["dt_max"] = dt_max
        super().__init__(message, details)


class BallExitError(ModuleError):
    """State left the hyperbolicity ball |phi| <= 2 delta."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.BALL_EXIT
    source_module: ClassVar[str] = "solver"
    title: ClassVar[str] = "State left the hyperbolicity ball"

    def __init__(
        self,
        message: Optional[str] = None,
        sup_norm: Optional[float] = None,
        radius: Optional[float] = None,
        module: Optional[str] = None,
    ):
        details: Dict[str, Any] = {}
        if sup_norm is not None:
            details["sup_norm"] = sup_norm
        if radius is not None:
            details["radius"] = radius
        super().__init__(message, details, module=module)


class NonFiniteStateError(ModuleError):
    """Field contains NaN or infinite entries."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.NON_FINITE_STATE
    source_module: ClassVar[str] = "solver"
    title: ClassVar[str] = "Non-finite state"

    def __init__(self, message: Optional[str] = None, time: Optional[float] = None):
        details: Dict[str, Any] = {}
        if time is not None:
            details["time"] = time
        super().__init__(message, details)


class QuadratureError(ModuleError):
    """Richardson check of a profile quadrature failed."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.QUADRATURE_NOT_CONVERGED
    source_module: ClassVar[str] = "experiments"
    title: ClassVar[str] = "Quadrature did not converge"

    def __init__(
        self,
        message: Optional[str] = None,
        disagreement: Optional[float] = None,
        tolerance: Optional[float] = None,
    ):
        details: Dict[str, Any] = {}
        if disagreement is not None:
            details["disagreement"] = disagreement
        if tolerance is not None:
            details["tolerance"] = tolerance
        super().__init__(message, details)


class GeometryError(ModuleError):
    """Grouped characteristic strips do not separate."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.GEOMETRY_ERROR
    source_module: ClassVar[str] = "experiments"
    title: ClassVar[str] = "Strips do not separate"

    def __init__(self, message: Optional[str] = None, sigma: Optional[float] = None):
        details: Dict[str, Any] = {}
        if sigma is not None:
            details["sigma"] = sigma
        super().__init__(message, details)


class ShockTimeoutError(ModuleError):
    """No shock formed before the maximal simulation time."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.SHOCK_TIMEOUT
    source_module: ClassVar[str] = "experiments"
    title: ClassVar[str] = "No shock within the maximal time"

    def __init__(
        self,
        message: Optional[str] = None,
        t_max: Optional[float] = None,
        min_rho: Optional[float] = None,
    ):
        details: Dict[str, Any] = {}
        if t_max is not None:
            details["t_max"] = t_max
        if min_rho is not None:
            details["min_rho"] = min_rho
        super().__init__(message, details)


class DomainError(ModuleError):
    """Argument outside the domain of a closed-form bound."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.DOMAIN_ERROR
    source_module: ClassVar[str] = "experiments"
    title: ClassVar[str] = "Argument outside the admissible domain"

    def __init__(
        self,
        message: Optional[str] = None,
        argument: Optional[str] = None,
        value: Any = None,
        module: Optional[str] = None,
    ):
        details: Dict[str, Any] = {}
        if argument:
            details["argument"] = argument
        if value is not None:
            details["value"] = value
        super().__init__(message, details, module=module)


class InvariantFailure(ModuleError):
    """A verified identity or acceptance check did not hold."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.INVARIANT_FAILED
    source_module: ClassVar[str] = "cli"
    title: ClassVar[str] = "Invariant check failed"

    def __init__(
        self,
        message: Optional[str] = None,
        failed: Optional[Sequence[str]] = None,
        module: Optional[str] = None,
    ):
        details: Dict[str, Any] = {}
        if failed:
            details["failed"] = list(failed)
        super().__init__(message, details, module=module)


class ArtifactIOError(ModuleError):
    """Output directory or artifact could not be written."""

    error_code: ClassVar[LabErrorCode] = LabErrorCode.IO_ERROR
    source_module: ClassVar[str] = "cli"
    title: ClassVar[str] = "Artifact write failed"

    def __init__(self, message: Optional[str] = None, path: Optional[str] = None):
        details: Dict[str, Any] = {}
        if path:
            details["path"] = path
        super().__init__(message, details)
