"""Error report models built on msgspec."""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Any, Dict, Optional

import msgspec


def _isoformat(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    else:
        dt = dt.astimezone(timezone.utc)
    return dt.isoformat().replace("+00:00", "Z")


class ErrorDetail(msgspec.Struct, kw_only=True, omit_defaults=True):
    """Serializable representation of a lab error."""

    code: str
    message: str
    module: str
    exit_code: int
    details: Dict[str, Any] = msgspec.field(default_factory=dict)
    # tracing fields stay out of summary.json unless asked for
    run_id: Optional[str] = None
    timestamp: Optional[datetime] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to builtin types, ensuring ISO timestamps."""
        data = msgspec.to_builtins(self, builtin_types=(datetime,))
        if self.timestamp is not None:
            data["timestamp"] = _isoformat(self.timestamp)
        return data


class ErrorReport(msgspec.Struct, kw_only=True, omit_defaults=True):
    """`{"error": {...}}` block written into summary.json on failure."""

    error: ErrorDetail

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.error.to_dict()}

