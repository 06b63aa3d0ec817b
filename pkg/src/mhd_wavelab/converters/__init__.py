from .generic import internal_error
from .python_converter import ExceptionConverter

__all__ = ["ExceptionConverter", "internal_error"]
