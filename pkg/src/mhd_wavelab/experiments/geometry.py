"""Characteristic strips: grouped speed ranges, separation gap and separating time."""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Tuple

import msgspec
import numpy as np

from ..core.exceptions import GeometryError
from ..eigensystem import Regime
from ..solver import Run
from ..solver.scheme import speed_bounds
from ..state import PhysParams

logger = logging.getLogger(__name__)

# families that travel together in each regime, fastest group first
FAMILY_GROUPS: Dict[Regime, Tuple[Tuple[int, ...], ...]] = {
    Regime.MHD: ((1,), (2, 3), (4,), (5, 6), (7,)),
    Regime.H1ZERO: ((1,), (2, 3, 4, 5, 6), (7,)),
    Regime.EULER: ((1,), (2, 3, 4), (5,)),
}


def group_label(group: Tuple[int, ...]) -> str:
    return str(group[0]) if len(group) == 1 else f"{group[0]}bar"


class StripGeometry(msgspec.Struct, kw_only=True):
    regime: str
    groups: List[List[int]]
    lower: List[float]
    upper: List[float]
    sigma: float
    t0: float
    eta: float
    radius: float

    def bounds(self, family: int) -> Tuple[float, float]:
        """Speed range of the group that contains ``family``."""
        for group, lo, hi in zip(self.groups, self.lower, self.upper):
            if family in group:
                return lo, hi
        raise KeyError(family)

    def outside_strip(self, x: float, t: float, family: int) -> bool:
        """True when no characteristic of the family launched in [-2 eta, 2 eta] can reach (x, t)."""
        lo, hi = self.bounds(family)
        return bool(x > 2.0 * self.eta + hi * t or x < -2.0 * self.eta + lo * t)


def strip_geometry(
    p: PhysParams,
    regime: Optional[Regime] = None,
    *,
    samples: int = 10_000,
    seed: int = 0,
    radius: Optional[float] = None,
) -> StripGeometry:
    """
    Sampled group speed ranges over the ball of ``radius`` (default 2 delta).

    sigma is the smallest gap between consecutive groups and t0 = 4 eta / sigma.
    """
    regime = regime or Regime.for_params(p)
    radius = p.ball_radius if radius is None else radius
    lo, hi = speed_bounds(p, regime, radius, samples=samples, seed=seed)
    groups = FAMILY_GROUPS[regime]
    lower = [float(min(lo[f - 1] for f in g)) for g in groups]
    upper = [float(max(hi[f - 1] for f in g)) for g in groups]
    sigma = min(lower[g] - upper[g + 1] for g in range(len(groups) - 1))
    if sigma <= 0:
        raise GeometryError(
            "Grouped strips overlap for every time; shrink the ball radius",
            sigma=float(sigma),
        )
    geometry = StripGeometry(
        regime=regime.value,
        groups=[list(g) for g in groups],
        lower=lower,
        upper=upper,
        sigma=float(sigma),
        t0=4.0 * p.eta / sigma,
        eta=p.eta,
        radius=radius,
    )
    logger.debug("Strip geometry", extra={"regime": regime.value, "sigma": sigma, "t0": geometry.t0})
    return geometry


def strip_interval(run: Run, family: int, t: float) -> Optional[Tuple[float, float]]:
    """[X(z_min, t), X(z_max, t)] from the outermost traces of a family."""
    traces = run.traces_of(family)
    if not traces:
        return None
    left = min(traces, key=lambda tr: tr.z)
    right = max(traces, key=lambda tr: tr.z)
    a, _ = left.at(t)
    b, _ = right.at(t)
    return (min(a, b), max(a, b))


def group_interval(run: Run, group: Tuple[int, ...], t: float) -> Optional[Tuple[float, float]]:
    """Hull of the member strips; overlapping members make the union an interval."""
    parts = [iv for iv in (strip_interval(run, f, t) for f in group) if iv is not None]
    if not parts:
        return None
    return min(a for a, _ in parts), max(b for _, b in parts)


def strips_separated(run: Run, regime: Regime, t: float) -> bool:
    """Pairwise disjointness of the grouped strips at time t."""
    intervals = [iv for iv in (group_interval(run, g, t) for g in FAMILY_GROUPS[regime]) if iv is not None]
    intervals.sort()
    return all(a[1] < b[0] for a, b in zip(intervals[:-1], intervals[1:]))


def inside_mask(x: np.ndarray, interval: Optional[Tuple[float, float]]) -> np.ndarray:
    if interval is None:
        return np.zeros(len(x), dtype=bool)
    return (x >= interval[0]) & (x <= interval[1])
