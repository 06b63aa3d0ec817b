"""
Characteristics, inverse densities and transported amplitudes through a computed field.

A characteristic of family i solves dX/dt = lambda_i(Phi(X, t)); its inverse density
rho_i = dX/dz obeys d rho_i/dt = rho_i d_x lambda_i = rho_i grad(lambda_i) . d_x Phi,
which holds in any eigenvector normalization.
"""

from __future__ import annotations

import logging
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize

from ..coefficients import coefficient_tables, lambda_gradients
from ..core.exceptions import IndexContractError
from ..eigensystem import H_FLOOR, Normalization, Regime, basis_normalization, eigen_batch
from ..state import PhysParams
from .field import CharTrace, Field, Run, SolverSettings

logger = logging.getLogger(__name__)


def default_launches(regime: Regime, eta: float, settings: SolverSettings) -> List[Tuple[int, float]]:
    """Launch points over [-2 eta, 2 eta]: a dense fan for family 1, a few for the rest."""
    launches: List[Tuple[int, float]] = []
    for family in range(1, regime.family_count + 1):
        count = settings.fast_traces if family == 1 else settings.traces_per_family
        launches.extend((family, float(z)) for z in np.linspace(-2.0 * eta, 2.0 * eta, count))
    return launches


def _interp_columns(xi: np.ndarray, x: np.ndarray, values: np.ndarray, columns: np.ndarray) -> np.ndarray:
    """values[:, columns[j]] interpolated at xi[j]."""
    out = np.empty(len(xi))
    for col in np.unique(columns):
        mask = columns == col
        out[mask] = np.interp(xi[mask], x, values[:, col])
    return out


class LiveTracer:
    """Traces advanced alongside the solver with the same Heun step."""

    def __init__(
        self,
        field0: Field,
        launches: Sequence[Tuple[int, float]],
        p: PhysParams,
        regime: Regime,
        normalization: Normalization,
        lam0: np.ndarray,
    ) -> None:
        if not launches:
            raise IndexContractError("No characteristics to trace", indices=(), family_count=regime.family_count)
        families = [fam for fam, _ in launches]
        if any(not 1 <= fam <= regime.family_count for fam in families):
            raise IndexContractError(
                "Launch family outside the regime", indices=tuple(families), family_count=regime.family_count
            )
        self.p = p
        self.regime = regime
        self.normalization = normalization
        self.families = np.array(families, dtype=int)
        self.z = np.array([z for _, z in launches], dtype=float)
        self.X = self.z.copy()
        self.rho = np.ones(len(self.z))
        self.truncated = np.zeros(len(self.z), dtype=bool)
        self._field = field0
        self._lam = lam0
        self._dlam = np.gradient(lam0, field0.dx, axis=0)

    def _speeds(self, field: Field, lam: np.ndarray, dlam: np.ndarray, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        xi = X - field.frame_speed * field.time
        cols = self.families - 1
        return _interp_columns(xi, field.x, lam, cols), _interp_columns(xi, field.x, dlam, cols)

    def advance(
        self, dt: float, field: Field, lam: np.ndarray, rho_floor: float
    ) -> Optional[Tuple[float, float]]:
        """Move every active trace over one step; returns (t, x) when a family-1 trace reaches ``rho_floor``."""
        dlam = np.gradient(lam, field.dx, axis=0)
        speed0, growth0 = self._speeds(self._field, self._lam, self._dlam, self.X)
        x_pred = self.X + dt * speed0
        rho_pred = self.rho * (1.0 + dt * growth0)
        speed1, growth1 = self._speeds(field, lam, dlam, x_pred)
        active = ~self.truncated
        new_x = np.where(active, self.X + 0.5 * dt * (speed0 + speed1), self.X)
        new_rho = np.where(active, self.rho + 0.5 * dt * (self.rho * growth0 + rho_pred * growth1), self.rho)

        lab = field.lab_x
        self.truncated |= (new_x < lab[0]) | (new_x > lab[-1])

        shock = None
        crossing = active & (self.families == 1) & (new_rho <= rho_floor) & (self.rho > rho_floor)
        if np.any(crossing):
            frac = (self.rho - rho_floor) / np.where(crossing, self.rho - new_rho, 1.0)
            times = np.where(crossing, self._field.time + frac * dt, np.inf)
            first = int(np.argmin(times))
            position = float(self.X[first] + frac[first] * (new_x[first] - self.X[first]))
            shock = (float(times[first]), position)

        self.X, self.rho = new_x, new_rho
        self._field, self._lam, self._dlam = field, lam, dlam
        return shock

    def min_rho(self, family: int) -> float:
        mask = self.families == family
        return float(np.min(self.rho[mask])) if np.any(mask) else float("nan")

    def sample(self) -> tuple:
        """(t, X, rho, w, phi, dphi) at the current time."""
        field = self._field
        phi = field.sample(self.X)
        grad = Field(x=field.x, phi=field.gradient(), time=field.time, frame_speed=field.frame_speed)
        dphi = grad.sample(self.X)
        _, _, left = eigen_batch(phi, self.p, self.regime, self.normalization, check=False)
        rows = left[np.arange(len(self.X)), self.families - 1, :]
        w = np.einsum("nj,nj->n", rows, self.regime.restrict(dphi))
        return field.time, self.X.copy(), self.rho.copy(), w, phi, dphi

    def collect(self, samples: Sequence[tuple]) -> List[CharTrace]:
        t = np.array([s[0] for s in samples])
        X = np.stack([s[1] for s in samples])
        rho = np.stack([s[2] for s in samples])
        w = np.stack([s[3] for s in samples])
        phi = np.stack([s[4] for s in samples])
        dphi = np.stack([s[5] for s in samples])
        return [
            CharTrace(
                family=int(fam),
                z=float(self.z[j]),
                t=t,
                X=X[:, j],
                rho=rho[:, j],
                w=w[:, j],
                phi=phi[:, j, :],
                dphi=dphi[:, j, :],
                truncated=bool(self.truncated[j]),
            )
            for j, fam in enumerate(self.families)
        ]


class _FieldHistory:
    """Stored snapshots and their gradients, linear in time."""

    def __init__(self, run: Run) -> None:
        self.snapshots = run.snapshots
        self.times = run.times
        self.grads = [snap.gradient() for snap in run.snapshots]

    def at(self, t: float, x_lab: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if len(self.times) == 1:
            snap = self.snapshots[0]
            grad = Field(x=snap.x, phi=self.grads[0], time=t, frame_speed=snap.frame_speed)
            return snap.at(snap.phi, t).sample(x_lab), grad.sample(x_lab)
        hi = int(np.clip(np.searchsorted(self.times, t), 1, len(self.times) - 1))
        lo = hi - 1
        span = self.times[hi] - self.times[lo]
        s = float(np.clip((t - self.times[lo]) / span, 0.0, 1.0)) if span > 0 else 0.0
        out = []
        for values in ((self.snapshots[lo].phi, self.snapshots[hi].phi), (self.grads[lo], self.grads[hi])):
            blend = (1.0 - s) * values[0] + s * values[1]
            snap = self.snapshots[lo]
            out.append(Field(x=snap.x, phi=blend, time=t, frame_speed=snap.frame_speed).sample(x_lab))
        return out[0], out[1]

    def inside(self, t: float, x_lab: float) -> bool:
        lab = self.snapshots[0].x + self.snapshots[0].frame_speed * t
        return bool(lab[0] <= x_lab <= lab[-1])


def trace_characteristic(
    run: Run,
    i: int,
    z: float,
    p: PhysParams,
    regime: Optional[Regime] = None,
    *,
    substeps: int = 4,
) -> CharTrace:
    """Integrate X_i(z, t) and rho_i through the stored snapshots with Heun steps."""
    regime = regime or Regime(run.regime)
    if not 1 <= i <= regime.family_count:
        raise IndexContractError("Family outside the regime", indices=(i,), family_count=regime.family_count)
    history = _FieldHistory(run)
    normalization = basis_normalization(regime)
    times = run.times
    grid = np.concatenate(
        [np.linspace(a, b, substeps, endpoint=False) for a, b in zip(times[:-1], times[1:])] + [times[-1:]]
    )

    def rates(t: float, x: float) -> Tuple[float, float, np.ndarray, np.ndarray]:
        phi, dphi = history.at(t, np.array([x]))
        lam = eigen_batch(phi, p, regime, normalization, check=False).lambdas[0, i - 1]
        grad = lambda_gradients(phi, p, regime)[0, i - 1]
        return float(lam), float(grad @ regime.restrict(dphi[0])), phi[0], dphi[0]

    X, rho = float(z), 1.0
    rows: List[Tuple[float, float, float, np.ndarray, np.ndarray]] = []
    truncated = False
    for n, t in enumerate(grid):
        speed, growth, phi, dphi = rates(t, X)
        rows.append((t, X, rho, phi, dphi))
        if n == len(grid) - 1:
            break
        dt = grid[n + 1] - t
        x_pred, rho_pred = X + dt * speed, rho * (1.0 + dt * growth)
        if not history.inside(grid[n + 1], x_pred):
            truncated = True
            break
        speed1, growth1, _, _ = rates(grid[n + 1], x_pred)
        X = X + 0.5 * dt * (speed + speed1)
        rho = rho + 0.5 * dt * (rho * growth + rho_pred * growth1)

    phis = np.stack([r[3] for r in rows])
    dphis = np.stack([r[4] for r in rows])
    _, _, left = eigen_batch(phis, p, regime, normalization, check=False)
    w = np.einsum("nj,nj->n", left[:, i - 1, :], regime.restrict(dphis))
    return CharTrace(
        family=i,
        z=float(z),
        t=np.array([r[0] for r in rows]),
        X=np.array([r[1] for r in rows]),
        rho=np.array([r[2] for r in rows]),
        w=w,
        phi=phis,
        dphi=dphis,
        truncated=truncated,
    )


class TransportResidual(NamedTuple):
    t: np.ndarray
    w: np.ndarray
    v: np.ndarray
    rho: np.ndarray


def transport_right_hand_sides(
    trace: CharTrace, p: PhysParams, regime: Regime, *, h_floor: float = H_FLOOR
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Amplitudes w (coefficient basis) and the right-hand sides for w_i, v_i and rho_i at every sample."""
    i = trace.family - 1
    lam, right, left = eigen_batch(trace.phi, p, regime, Normalization.COEFFICIENT, h_floor=h_floor)
    del lam, right
    w = np.einsum("nij,nj->ni", left, regime.restrict(trace.dphi))
    table = coefficient_tables(trace.phi, p, regime, h_floor=h_floor)
    c_row = table.c[:, i, :]
    gamma = table.gamma[:, i, :, :]
    wi = w[:, i]
    own = np.einsum("nm,nm->n", gamma[:, i, :], w)
    others = np.einsum("nkm,nk,nm->n", gamma, w, w) - wi * own
    coupling = np.einsum("nm,nm->n", c_row, w)
    rhs_w = -wi * coupling + wi * own + others
    rhs_v = trace.rho * wi * own + trace.rho * others
    rhs_rho = trace.rho * coupling
    return w, rhs_w, rhs_v, rhs_rho


def transport_residual(
    trace: CharTrace,
    p: PhysParams,
    regime: Optional[Regime] = None,
    *,
    h_floor: float = H_FLOOR,
) -> TransportResidual:
    """
    |d/dt - rhs| of the transport equations for w_i, v_i = rho_i w_i and rho_i along a trace.

    Time derivatives are centered differences over the trace samples; the end
    samples are dropped.
    """
    regime = regime or Regime.for_params(p)
    if len(trace.t) < 3:
        empty = np.zeros(0)
        return TransportResidual(empty, empty, empty, empty)
    i = trace.family - 1
    w, rhs_w, rhs_v, rhs_rho = transport_right_hand_sides(trace, p, regime, h_floor=h_floor)
    wi = w[:, i]
    v = trace.rho * wi
    dw = np.gradient(wi, trace.t)
    dv = np.gradient(v, trace.t)
    drho = np.gradient(trace.rho, trace.t)
    inner = slice(1, -1)
    return TransportResidual(
        t=trace.t[inner],
        w=np.abs(dw - rhs_w)[inner],
        v=np.abs(dv - rhs_v)[inner],
        rho=np.abs(drho - rhs_rho)[inner],
    )


def rho_consistency(trace: CharTrace, p: PhysParams, regime: Optional[Regime] = None) -> float:
    """Sup of |rho grad(lambda_i) . d_x Phi - rho sum_m c^i_im w_m| over the samples."""
    regime = regime or Regime.for_params(p)
    i = trace.family - 1
    grads = lambda_gradients(trace.phi, p, regime)[:, i, :]
    direct = trace.rho * np.einsum("nj,nj->n", grads, regime.restrict(trace.dphi))
    _, _, _, rhs_rho = transport_right_hand_sides(trace, p, regime, h_floor=0.0)
    return float(np.max(np.abs(direct - rhs_rho)))


class Intersection(NamedTuple):
    x: float
    t: float
    dt_dyi: float  # rho_i / (lambda_j - lambda_i) at the crossing


def _trace_for(run: Run, family: int, z: float, p: PhysParams, regime: Regime) -> CharTrace:
    for tr in run.traces_of(family):
        if abs(tr.z - z) <= 1e-12 * max(1.0, abs(z)):
            return tr
    return trace_characteristic(run, family, z, p, regime)


def bicharacteristic_intersection(
    run: Run,
    i: int,
    y_i: float,
    j: int,
    y_j: float,
    p: PhysParams,
    regime: Optional[Regime] = None,
) -> Optional[Intersection]:
    """Earliest crossing of X_i(y_i, .) and X_j(y_j, .), refined by bisection."""
    regime = regime or Regime(run.regime)
    if i == j:
        raise IndexContractError("Bi-characteristics need two different families", indices=(i, j))
    first = _trace_for(run, i, y_i, p, regime)
    second = _trace_for(run, j, y_j, p, regime)
    horizon = min(first.t[-1], second.t[-1])
    times = np.union1d(first.t, second.t)
    times = times[times <= horizon]

    def gap(t: float) -> float:
        return float(np.interp(t, first.t, first.X) - np.interp(t, second.t, second.X))

    values = np.array([gap(t) for t in times])
    if values[0] == 0.0:
        crossing = float(times[0])
    else:
        change = np.nonzero(np.sign(values[1:]) != np.sign(values[:-1]))[0]
        if len(change) == 0:
            return None
        k = int(change[0])
        crossing = float(scipy.optimize.bisect(gap, times[k], times[k + 1], xtol=1e-14))

    x, rho_i = first.at(crossing)
    history = _FieldHistory(run)
    phi, _ = history.at(crossing, np.array([x]))
    lam = eigen_batch(phi, p, regime, basis_normalization(regime), check=False)
    lam_i, lam_j = float(lam.lambdas[0, i - 1]), float(lam.lambdas[0, j - 1])
    return Intersection(x=x, t=crossing, dt_dyi=rho_i / (lam_j - lam_i))
