from enum import StrEnum
from typing import Dict


class LabErrorCode(StrEnum):
    # General errors
    INTERNAL_ERROR = "INTERNAL_ERROR"
    IO_ERROR = "IO_ERROR"

    # Input errors
    INVALID_CONFIG = "INVALID_CONFIG"
    INVALID_PARAMS = "INVALID_PARAMS"
    INVALID_STATE = "INVALID_STATE"
    INDEX_CONTRACT = "INDEX_CONTRACT"
    DOMAIN_ERROR = "DOMAIN_ERROR"

    # Eigenstructure and coefficient errors
    NUMERICAL_DOMAIN = "NUMERICAL_DOMAIN"
    DEGENERATE_DIRECTION = "DEGENERATE_DIRECTION"
    ORACLE_FAILURE = "ORACLE_FAILURE"
    ORACLE_NOT_CONVERGED = "ORACLE_NOT_CONVERGED"
    STENCIL_ERROR = "STENCIL_ERROR"
    SINGULARITY_DETECTED = "SINGULARITY_DETECTED"

    # Solver errors
    CFL_VIOLATION = "CFL_VIOLATION"
    BALL_EXIT = "BALL_EXIT"
    NON_FINITE_STATE = "NON_FINITE_STATE"

    # Experiment errors
    QUADRATURE_NOT_CONVERGED = "QUADRATURE_NOT_CONVERGED"
    GEOMETRY_ERROR = "GEOMETRY_ERROR"
    SHOCK_TIMEOUT = "SHOCK_TIMEOUT"
    INVARIANT_FAILED = "INVARIANT_FAILED"

    @classmethod
    def _missing_(cls, value):
        """Create new LabErrorCode for unknown values."""
        if isinstance(value, str):
            pseudo_member = str.__new__(cls, value)
            pseudo_member._name_ = value
            pseudo_member._value_ = value
            return pseudo_member
        return None


# 0 is success and 2 belongs to argparse usage errors.
EXIT_CODE_MAP: Dict[LabErrorCode, int] = {
    LabErrorCode.INTERNAL_ERROR: 1,
    LabErrorCode.INVALID_CONFIG: 3,
    LabErrorCode.INVALID_PARAMS: 4,
    LabErrorCode.INVALID_STATE: 5,
    LabErrorCode.INDEX_CONTRACT: 6,
    LabErrorCode.DOMAIN_ERROR: 7,
    LabErrorCode.NUMERICAL_DOMAIN: 10,
    LabErrorCode.DEGENERATE_DIRECTION: 11,
    LabErrorCode.ORACLE_FAILURE: 12,
    LabErrorCode.STENCIL_ERROR: 13,
    LabErrorCode.SINGULARITY_DETECTED: 14,
    LabErrorCode.ORACLE_NOT_CONVERGED: 15,
    LabErrorCode.CFL_VIOLATION: 20,
    LabErrorCode.BALL_EXIT: 21,
    LabErrorCode.NON_FINITE_STATE: 22,
    LabErrorCode.QUADRATURE_NOT_CONVERGED: 30,
    LabErrorCode.GEOMETRY_ERROR: 31,
    LabErrorCode.SHOCK_TIMEOUT: 32,
    LabErrorCode.INVARIANT_FAILED: 40,
    LabErrorCode.IO_ERROR: 50,
}


def get_exit_code(error_code: LabErrorCode) -> int:
    """Get process exit code for an error code."""
    return EXIT_CODE_MAP.get(error_code, EXIT_CODE_MAP[LabErrorCode.INTERNAL_ERROR])
