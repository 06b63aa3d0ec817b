"""Render ``LabError`` instances for the terminal or for summary.json."""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from typing import Any

from .exceptions import LabError
from .reports import ErrorDetail, ErrorReport


class RenderFormat(StrEnum):
    """Supported error output shapes."""

    TEXT = "text"
    JSON = "json"


@dataclass
class RenderResult:
    payload: Any
    media_type: str


class ErrorRenderer:
    """Render ``LabError`` objects into text lines or JSON-ready dictionaries."""

    def __init__(
        self,
        format: RenderFormat = RenderFormat.JSON,
        *,
        include_trace: bool = False,
    ):
        self.format = format
        self.include_trace = include_trace

    def render(self, error: LabError, *, message: str) -> RenderResult:
        if self.format == RenderFormat.TEXT:
            return self._render_text(error, message=message)
        return self._render_json(error, message=message)

    def _render_json(self, error: LabError, *, message: str) -> RenderResult:
        detail = ErrorDetail(
            code=error.code.value,
            message=message,
            module=error.module,
            exit_code=error.exit_code,
            details=error.details,
            run_id=error.run_id if self.include_trace else None,
            timestamp=error.timestamp if self.include_trace else None,
        )
        return RenderResult(payload=ErrorReport(error=detail).to_dict(), media_type="application/json")

    def _render_text(self, error: LabError, *, message: str) -> RenderResult:
        line = f"error[{error.code.value}] in {error.module}: {message}"
        if error.details:
            pairs = ", ".join(f"{key}={value}" for key, value in sorted(error.details.items()))
            line = f"{line} ({pairs})"
        return RenderResult(payload=line, media_type="text/plain")
