import traceback
from typing import Optional

from ..core.error_codes import LabErrorCode
from ..core.exceptions import LabError

PACKAGE = "mhd_wavelab"


def _lab_frame(error: BaseException) -> Optional[traceback.FrameSummary]:
    """Innermost traceback frame that lies inside the package."""
    frames = traceback.extract_tb(error.__traceback__)
    for frame in reversed(frames):
        if f"/{PACKAGE}/" in frame.filename.replace("\\", "/"):
            return frame
    return None


def _module_of(frame: traceback.FrameSummary) -> str:
    path = frame.filename.replace("\\", "/").split(f"/{PACKAGE}/", 1)[1]
    return path.removesuffix(".py").removesuffix("/__init__").replace("/", ".")


def internal_error(error: BaseException, *, with_location: bool = False) -> LabError:
    """
    Wrap an exception no converter rule covers as INTERNAL_ERROR.

    The error is attributed to the lab module whose code raised it, or to
    "lab" when the traceback never enters the package.
    """
    frame = _lab_frame(error)
    details: dict[str, object] = {
        "exception_type": type(error).__name__,
        "reason": str(error) or None,
    }
    if with_location and frame is not None:
        details["location"] = f"{frame.filename}:{frame.lineno} in {frame.name}"
    return LabError(
        code=LabErrorCode.INTERNAL_ERROR,
        message=f"Unexpected {type(error).__name__} inside the lab",
        details=details,
        module=_module_of(frame) if frame is not None else "lab",
    )
