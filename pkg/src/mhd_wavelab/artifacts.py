"""Result files: summary.json plus per-experiment CSV tables."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import msgspec
import numpy as np
import pandas as pd

from .core.exceptions import ArtifactIOError

logger = logging.getLogger(__name__)

SUMMARY_NAME = "summary.json"


def _builtin(value: Any) -> Any:
    """numpy scalars and arrays to plain Python; non-finite floats to strings JSON can hold."""
    if isinstance(value, np.ndarray):
        return [_builtin(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, Mapping):
        return {str(k): _builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_builtin(v) for v in value]
    if isinstance(value, msgspec.Struct):
        return _builtin(msgspec.to_builtins(value))
    return value


def ensure_output_dir(path: Path | str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactIOError(f"Cannot create output directory: {exc.strerror}", path=str(out)) from exc
    return out


def encode_summary(summary: Mapping[str, Any]) -> bytes:
    """Sorted-key, indented UTF-8 JSON ending in a newline."""
    raw = msgspec.json.encode(_builtin(summary), order="sorted")
    return msgspec.json.format(raw, indent=2) + b"\n"


def write_summary(output_dir: Path | str, summary: Mapping[str, Any]) -> Path:
    path = Path(output_dir) / SUMMARY_NAME
    try:
        path.write_bytes(encode_summary(summary))
    except OSError as exc:
        raise ArtifactIOError(f"Cannot write summary: {exc.strerror}", path=str(path)) from exc
    logger.info("Summary written", extra={"path": str(path)})
    return path


def write_table(output_dir: Path | str, name: str, rows: Sequence[Mapping[str, Any]] | pd.DataFrame) -> Path:
    """CSV with a header row, '.' decimals and LF line endings."""
    path = Path(output_dir) / name
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame([_flatten(_builtin(r)) for r in rows])
    try:
        frame.to_csv(path, index=False, lineterminator="\n", float_format="%.12g")
    except OSError as exc:
        raise ArtifactIOError(f"Cannot write table: {exc.strerror}", path=str(path)) from exc
    logger.debug("Table written", extra={"path": str(path), "rows": len(frame)})
    return path


def _flatten(row: Mapping[str, Any], prefix: str = "") -> dict:
    """Nested mappings become ``outer.inner`` columns; lists are joined with ';'."""
    flat: dict = {}
    for key, value in row.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, f"{name}."))
        elif isinstance(value, list):
            flat[name] = ";".join(str(v) for v in value)
        else:
            flat[name] = value
    return flat


def field_frame(x: np.ndarray, phi: np.ndarray, names: Iterable[str], **columns: np.ndarray) -> pd.DataFrame:
    frame = pd.DataFrame(phi, columns=list(names))
    frame.insert(0, "x", x)
    for key, values in columns.items():
        frame[key] = values
    return frame


def read_summary(path: Path | str) -> dict:
    try:
        return msgspec.json.decode(Path(path).read_bytes())
    except OSError as exc:
        raise ArtifactIOError(f"Cannot read summary: {exc.strerror}", path=str(path)) from exc
