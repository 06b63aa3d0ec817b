import configparser
from typing import Dict, Tuple, Type

import msgspec
import numpy as np

from ..core.error_codes import LabErrorCode
from ..core.exceptions import ArtifactIOError, ConfigError, LabError, OracleError
from .generic import internal_error


class ExceptionConverter:
    """Convert exceptions raised by Python, numpy or msgspec into lab errors."""

    # Order matters: subclasses before their bases
    EXCEPTION_MAP: Dict[Type[BaseException], Tuple[LabErrorCode, str]] = {
        np.linalg.LinAlgError: (LabErrorCode.ORACLE_FAILURE, "Linear algebra routine failed"),
        msgspec.ValidationError: (LabErrorCode.INVALID_CONFIG, "Configuration value has the wrong type"),
        configparser.Error: (LabErrorCode.INVALID_CONFIG, "Configuration file could not be parsed"),
        FloatingPointError: (LabErrorCode.NON_FINITE_STATE, "Floating point error"),
        ZeroDivisionError: (LabErrorCode.NUMERICAL_DOMAIN, "Division by zero"),
        ValueError: (LabErrorCode.INVALID_PARAMS, "Invalid value provided"),
        OSError: (LabErrorCode.IO_ERROR, "File system error"),
    }

    @classmethod
    def convert(cls, error: BaseException) -> LabError:
        """
        Convert an exception to a LabError.

        Args:
            error: any exception

        Returns:
            LabError instance (the error itself when it already is one)
        """
        if isinstance(error, LabError):
            return error

        for exc_type, (code, default_message) in cls.EXCEPTION_MAP.items():
            if isinstance(error, exc_type):
                return cls._create_lab_error(error, code, default_message)

        return internal_error(error)

    @classmethod
    def _create_lab_error(
        cls, error: BaseException, code: LabErrorCode, default_message: str
    ) -> LabError:
        message = str(error) or default_message
        details = {"exception_type": type(error).__name__}

        if isinstance(error, (msgspec.ValidationError, configparser.Error)):
            return ConfigError(message=message)

        elif isinstance(error, np.linalg.LinAlgError):
            return OracleError(message=message, reason=type(error).__name__)

        elif isinstance(error, OSError):
            return ArtifactIOError(message=message, path=getattr(error, "filename", None))

        return LabError(code=code, message=message, details=details)
