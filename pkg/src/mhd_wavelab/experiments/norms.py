"""Running-supremum norms of a run inside and outside the characteristic strips."""

from __future__ import annotations

import math
from typing import Dict, List, Optional

import msgspec
import numpy as np

from ..decomposition import decompose_field
from ..eigensystem import Regime
from ..solver import Run
from ..state import RHO, U1, PhysParams
from .geometry import FAMILY_GROUPS, group_interval, group_label, inside_mask, strip_interval


class NormReport(msgspec.Struct, kw_only=True):
    """Norm histories at the stored snapshot times; every series is a running supremum."""

    times: List[float]
    S: List[float]
    J: List[float]
    V: List[float]
    W: List[float]
    W_check: List[float]
    U_bar: List[float]
    V_by_group: Dict[str, List[float]]
    W_check_prime: Dict[str, List[float]]
    min_rho: Dict[str, float]
    max_w: Dict[str, float]
    # sup |d_x u1| and |d_x rho| inside strip 1
    gradient_u1: List[float]
    gradient_rho: List[float]

    def last(self, name: str) -> float:
        series = getattr(self, name)
        return float(series[-1]) if series else float("nan")

    def ratios(self, theta: float, eta: float, W0: float) -> Dict[str, float]:
        """Empirical constants of the bootstrap conclusions and the t-weighted ratios."""
        t = self.times[-1] if self.times else 0.0
        scale2 = eta * W0**2
        return {
            "S_max": self.last("S"),
            "J_over_W0": self.last("J") / W0,
            "V_over_eta_W0sq": self.last("V") / scale2,
            "W_check_over_eta_W0sq": self.last("W_check") / scale2,
            "U_bar_over_eta_W0": self.last("U_bar") / (eta * W0),
            "tV_over_sqrt_theta": t * self.last("V") / math.sqrt(theta),
            "tW_check_over_sqrt_theta": t * self.last("W_check") / math.sqrt(theta),
            "J_over_sqrt_theta": self.last("J") / math.sqrt(theta),
        }


def _running(values: List[float]) -> List[float]:
    return [float(v) for v in np.maximum.accumulate(np.asarray(values, dtype=float))] if values else []


def compute_norms(run: Run, p: PhysParams, regime: Optional[Regime] = None, t: Optional[float] = None) -> NormReport:
    """
    S, J from the traces; V, W, W_check, U_bar from the stored snapshots.

    V is taken outside each group's strip, W_check inside the multi-family groups,
    W_check_prime inside the single-family groups other than the leading one.
    Amplitudes are evaluated in the solver basis.
    """
    regime = regime or Regime(run.regime)
    horizon = run.final.time if t is None else t
    groups = FAMILY_GROUPS[regime]
    singles = [g for g in groups if len(g) == 1 and g[0] != 1]
    multis = [g for g in groups if len(g) > 1]

    times: List[float] = []
    W: List[float] = []
    U: List[float] = []
    V_groups: Dict[str, List[float]] = {group_label(g): [] for g in groups}
    W_check: List[float] = []
    W_prime: Dict[str, List[float]] = {group_label(g): [] for g in singles}
    grad_u1: List[float] = []
    grad_rho: List[float] = []
    max_w = np.zeros(regime.family_count)

    for snap in run.snapshots:
        if snap.time > horizon * (1.0 + 1e-12):
            break
        grad = snap.gradient()
        w = np.abs(decompose_field(snap.phi, grad, p, regime))
        x = snap.lab_x
        times.append(snap.time)
        W.append(float(np.max(w)))
        U.append(float(np.max(np.abs(snap.phi))))
        max_w = np.maximum(max_w, w.max(axis=0))
        inside_check = 0.0
        for g in groups:
            interval = group_interval(run, g, snap.time)
            inside = inside_mask(x, interval)
            cols = [f - 1 for f in g]
            block = w[:, cols]
            outside_vals = block[~inside]
            V_groups[group_label(g)].append(float(outside_vals.max()) if outside_vals.size else 0.0)
            inside_vals = block[inside]
            inside_sup = float(inside_vals.max()) if inside_vals.size else 0.0
            if g in multis:
                inside_check = max(inside_check, inside_sup)
            elif g in singles:
                W_prime[group_label(g)].append(inside_sup)
        W_check.append(inside_check)
        strip1 = inside_mask(x, strip_interval(run, 1, snap.time))
        grad_u1.append(float(np.max(np.abs(grad[strip1, U1]))) if np.any(strip1) else 0.0)
        grad_rho.append(float(np.max(np.abs(grad[strip1, RHO]))) if np.any(strip1) else 0.0)

    S_series: List[float] = []
    J_series: List[float] = []
    min_rho: Dict[str, float] = {}
    for snap_t in times:
        S_now, J_now = 0.0, 0.0
        for tr in run.traces:
            mask = tr.t <= snap_t * (1.0 + 1e-12)
            if not np.any(mask):
                continue
            S_now = max(S_now, float(np.max(tr.rho[mask])))
            J_now = max(J_now, float(np.max(np.abs(tr.v[mask]))))
        S_series.append(S_now)
        J_series.append(J_now)
    for tr in run.traces:
        mask = tr.t <= horizon * (1.0 + 1e-12)
        key = str(tr.family)
        min_rho[key] = min(min_rho.get(key, np.inf), float(np.min(tr.rho[mask])))

    V_total = np.max(np.array([V_groups[k] for k in V_groups]), axis=0) if times else np.zeros(0)
    return NormReport(
        times=times,
        S=_running(S_series),
        J=_running(J_series),
        V=_running(list(V_total)),
        W=_running(W),
        W_check=_running(W_check),
        U_bar=_running(U),
        V_by_group={k: _running(v) for k, v in V_groups.items()},
        W_check_prime={k: _running(v) for k, v in W_prime.items()},
        min_rho=min_rho,
        max_w={str(i + 1): float(v) for i, v in enumerate(max_w)},
        gradient_u1=_running(grad_u1),
        gradient_rho=_running(grad_rho),
    )
