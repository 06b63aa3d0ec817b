"""
Configuration loading: built-in defaults < config file < command-line overrides.

The file is flat ``key = value`` text with one ``[section]`` per concern. Every
section is validated by converting it into its msgspec struct.
"""

from __future__ import annotations

import configparser
import logging
from enum import StrEnum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import msgspec

from .core.exceptions import ConfigError, ParamsError
from .eigensystem import Regime
from .experiments.data import InitialDataKind
from .solver import SolverSettings
from .state import PhysParams

logger = logging.getLogger(__name__)


class Command(StrEnum):
    VERIFY_EIGEN = "verify-eigen"
    VERIFY_COEFFS = "verify-coeffs"
    SIMULATE = "simulate"
    TRACE = "trace"
    SHOCK_SCAN = "shock-scan"


class ExperimentSettings(msgspec.Struct, kw_only=True, frozen=True):
    kind: InitialDataKind = InitialDataKind.SHOCK
    # None runs to 1.5 times the upper lifespan bound
    t_max: Optional[float] = None
    etas: List[float] = msgspec.field(default_factory=lambda: [0.1])
    w0_factors: List[float] = msgspec.field(default_factory=lambda: [1.0, 2.0, 4.0])
    samples: int = 10_000
    quad_points: int = 4096
    refinements: List[int] = msgspec.field(default_factory=list)
    co_moving: bool = True
    trace_family: int = 1
    trace_z: float = 0.0
    trace_count: int = 10

    def __post_init__(self) -> None:
        if self.t_max is not None and not self.t_max > 0:
            raise ParamsError("t_max must be positive", field="t_max", value=self.t_max, bound="> 0")
        if not self.etas or any(e <= 0 for e in self.etas):
            raise ParamsError("etas must be positive", field="etas", value=self.etas, bound="> 0")
        if not self.w0_factors or any(f <= 0 for f in self.w0_factors):
            raise ParamsError("w0_factors must be positive", field="w0_factors", value=self.w0_factors, bound="> 0")
        if self.samples < 1:
            raise ParamsError("samples must be positive", field="samples", value=self.samples, bound=">= 1")
        if any(n < 8 for n in self.refinements):
            raise ParamsError("Refinement grids need 8 nodes", field="refinements", value=self.refinements, bound=">= 8")
        if self.trace_count < 1:
            raise ParamsError("trace_count must be positive", field="trace_count", value=self.trace_count, bound=">= 1")


class RunConfig(msgspec.Struct, kw_only=True, frozen=True):
    command: Optional[Command] = None
    # None picks the regime from H1
    regime: Optional[Regime] = None
    output_dir: str = "results"
    seed: int = 0
    threads: int = 1

    def __post_init__(self) -> None:
        if self.threads < 1:
            raise ParamsError("threads must be positive", field="threads", value=self.threads, bound=">= 1")


class LabConfig(msgspec.Struct, kw_only=True, frozen=True):
    params: PhysParams = msgspec.field(default_factory=PhysParams)
    solver: SolverSettings = msgspec.field(default_factory=SolverSettings)
    experiment: ExperimentSettings = msgspec.field(default_factory=ExperimentSettings)
    run: RunConfig = msgspec.field(default_factory=RunConfig)

    @property
    def regime(self) -> Regime:
        return self.run.regime or Regime.for_params(self.params)

    def to_dict(self) -> Dict[str, Any]:
        return msgspec.to_builtins(self)


SECTIONS: Dict[str, type] = {
    "params": PhysParams,
    "solver": SolverSettings,
    "experiment": ExperimentSettings,
    "run": RunConfig,
}

LIST_KEYS = {"etas", "w0_factors", "refinements"}
NONE_VALUES = {"", "none", "null"}


def _section_keys(section: str) -> Tuple[str, ...]:
    return tuple(f.name for f in msgspec.structs.fields(SECTIONS[section]))


def _coerce(key: str, raw: str) -> Any:
    text = raw.strip()
    if key in LIST_KEYS:
        return [item.strip() for item in text.split(",") if item.strip()]
    if text.lower() in NONE_VALUES:
        return None
    return text


def _check_keys(section: str, values: Mapping[str, Any]) -> None:
    if section not in SECTIONS:
        raise ConfigError(f"Unknown section [{section}]", section=section)
    known = _section_keys(section)
    for key in values:
        if key not in known:
            raise ConfigError(f"Unknown key {key!r} in [{section}]", section=section, key=key)


def read_config_file(path: Path | str) -> Dict[str, Dict[str, str]]:
    """Raw string values per section; keys keep their case (``H1`` and ``A`` are case-sensitive)."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"Cannot read config file: {exc.strerror}", key="config", value=str(path)) from exc
    except configparser.Error as exc:
        raise ConfigError(f"Malformed config file: {exc.message}", value=str(path)) from exc
    raw = {section: dict(parser.items(section)) for section in parser.sections()}
    for section, values in raw.items():
        _check_keys(section, values)
    return raw


def parse_override(item: str) -> Tuple[str, str, str]:
    """``section.key=value`` -> (section, key, value)."""
    target, sep, value = item.partition("=")
    section, dot, key = target.strip().partition(".")
    if not sep or not dot or not section or not key:
        raise ConfigError("Overrides look like section.key=value", value=item)
    return section, key, value


def _convert(section: str, values: Mapping[str, str]) -> Any:
    _check_keys(section, values)
    payload = {key: _coerce(key, value) for key, value in values.items()}
    try:
        return msgspec.convert(payload, SECTIONS[section], strict=False)
    except msgspec.ValidationError as exc:
        raise ConfigError(str(exc), section=section) from exc


def load_config(
    path: Optional[Path | str] = None,
    overrides: Sequence[str] = (),
    flags: Optional[Mapping[str, Mapping[str, Any]]] = None,
) -> LabConfig:
    """
    Merge defaults, the optional config file, ``--set`` overrides and dedicated flags.

    ``flags`` holds already-typed values from dedicated options; ``None`` entries are ignored.
    """
    raw: Dict[str, Dict[str, str]] = {name: {} for name in SECTIONS}
    if path is not None:
        for section, values in read_config_file(path).items():
            raw[section].update(values)
    for item in overrides:
        section, key, value = parse_override(item)
        _check_keys(section, {key: value})
        raw[section][key] = value
    for section, values in (flags or {}).items():
        for key, value in values.items():
            if value is not None:
                _check_keys(section, {key: value})
                raw[section][key] = value if isinstance(value, str) else str(value)

    config = LabConfig(**{section: _convert(section, values) for section, values in raw.items()})
    logger.debug("Configuration resolved", extra={"config": config.to_dict()})
    return config
