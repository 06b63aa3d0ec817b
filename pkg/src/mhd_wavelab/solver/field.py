"""Grid fields, solver settings and the containers a run produces."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Dict, List, Optional

import msgspec
import numpy as np

from ..core.exceptions import ParamsError
from ..state import STATE_SIZE

MAX_SNAPSHOT_STRIDE = 4


class SolverSettings(msgspec.Struct, kw_only=True, frozen=True):
    """Grid, time-stepping and tracing knobs of a run."""

    nodes: int = 2**14
    cfl: float = 0.4
    rho_floor: float = 1e-3
    x_lo: Optional[float] = None
    x_hi: Optional[float] = None
    # the grid moves with this speed; x on the grid is x_lab - frame_speed * t
    frame_speed: float = 0.0
    snapshot_stride: int = 4
    # snapshots per disk-backed block
    snapshot_block: int = 64
    traces_per_family: int = 9
    fast_traces: int = 129
    log_every: int = 500

    def __post_init__(self) -> None:
        if self.nodes < 8:
            raise ParamsError("Need at least 8 grid nodes", field="nodes", value=self.nodes, bound=">= 8")
        if not 0 < self.cfl <= 0.4:
            raise ParamsError("CFL number must lie in (0, 0.4]", field="cfl", value=self.cfl, bound="(0, 0.4]")
        if not 0 < self.rho_floor < 1:
            raise ParamsError("rho_floor must lie in (0, 1)", field="rho_floor", value=self.rho_floor, bound="(0, 1)")
        if self.x_lo is not None and self.x_hi is not None and not self.x_hi > self.x_lo:
            raise ParamsError("Empty domain", field="x_hi", value=self.x_hi, bound=f"> {self.x_lo}")
        for name in ("snapshot_stride", "snapshot_block", "log_every"):
            if getattr(self, name) < 1:
                raise ParamsError(f"{name} must be positive", field=name, value=getattr(self, name), bound=">= 1")
        if self.snapshot_stride > MAX_SNAPSHOT_STRIDE:
            raise ParamsError(
                "Snapshot stride too coarse for linear interpolation in time",
                field="snapshot_stride",
                value=self.snapshot_stride,
                bound=f"<= {MAX_SNAPSHOT_STRIDE}",
            )
        if self.traces_per_family < 2 or self.fast_traces < 3:
            raise ParamsError(
                "Too few traces for strip boundaries",
                field="traces_per_family",
                value=self.traces_per_family,
                bound=">= 2 (fast_traces >= 3)",
            )


@dataclass(frozen=True)
class Field:
    """States on a uniform grid at one time."""

    x: np.ndarray
    phi: np.ndarray
    time: float = 0.0
    frame_speed: float = 0.0

    def __post_init__(self) -> None:
        if self.phi.shape != (len(self.x), STATE_SIZE):
            raise ParamsError(
                "Field states do not match the grid",
                field="phi",
                value=list(self.phi.shape),
                bound=f"({len(self.x)}, {STATE_SIZE})",
            )

    @classmethod
    def uniform(cls, x_lo: float, x_hi: float, nodes: int, frame_speed: float = 0.0) -> "Field":
        x = np.linspace(x_lo, x_hi, nodes)
        return cls(x=x, phi=np.zeros((nodes, STATE_SIZE)), frame_speed=frame_speed)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def lab_x(self) -> np.ndarray:
        return self.x + self.frame_speed * self.time

    def at(self, phi: np.ndarray, time: float) -> "Field":
        return Field(x=self.x, phi=phi, time=time, frame_speed=self.frame_speed)

    def gradient(self) -> np.ndarray:
        """Centered d/dx of every component, one-sided at the ends."""
        return np.gradient(self.phi, self.dx, axis=0)

    def sample(self, x_lab: np.ndarray) -> np.ndarray:
        """States at lab positions, linear in x, constant beyond the ends."""
        xi = np.asarray(x_lab, dtype=float) - self.frame_speed * self.time
        return np.stack([np.interp(xi, self.x, self.phi[:, j]) for j in range(STATE_SIZE)], axis=-1)


class StopReason(StrEnum):
    SHOCK = "shock"
    TIMEOUT = "timeout"


@dataclass
class CharTrace:
    """Samples of one characteristic: times, lab positions, inverse density and amplitudes."""

    family: int
    z: float
    t: np.ndarray
    X: np.ndarray
    rho: np.ndarray
    w: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    truncated: bool = False

    @property
    def v(self) -> np.ndarray:
        return self.rho * self.w

    def at(self, t: float) -> tuple[float, float]:
        """(X, rho) at time t by linear interpolation between samples."""
        return float(np.interp(t, self.t, self.X)), float(np.interp(t, self.t, self.rho))


@dataclass
class Run:
    """Everything a simulation keeps: strided snapshots, step sizes and live traces."""

    snapshots: List[Field]
    dt_history: List[float]
    traces: List[CharTrace]
    stop_reason: StopReason
    regime: str
    settings: SolverSettings
    shock_time: Optional[float] = None
    shock_position: Optional[float] = None
    steps: int = 0
    snapshot_stride: int = 1
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def final(self) -> Field:
        return self.snapshots[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([snap.time for snap in self.snapshots])

    @property
    def shocked(self) -> bool:
        return self.stop_reason is StopReason.SHOCK

    def traces_of(self, family: int) -> List[CharTrace]:
        return [tr for tr in self.traces if tr.family == family]

    def snapshot_at(self, t: float) -> Field:
        """Stored field linearly interpolated in time."""
        times = self.times
        if t <= times[0]:
            return self.snapshots[0]
        if t >= times[-1]:
            return self.snapshots[-1]
        hi = int(np.searchsorted(times, t))
        a, b = self.snapshots[hi - 1], self.snapshots[hi]
        s = (t - a.time) / (b.time - a.time)
        return a.at((1.0 - s) * a.phi + s * b.phi, t)
