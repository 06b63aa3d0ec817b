"""
Shock-formation experiments: lifespan bounds, detection and blow-up diagnostics.

The measured lifespan T* comes from the fastest family's inverse density. The
grid stops resolving the steepening front once rho_1 is small, so T* is the zero
of a linear fit over the last samples with rho_1 still above SHOCK_FIT_FLOOR.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import msgspec
import numpy as np
import scipy.integrate

from ..coefficients import fast_self_interaction
from ..core.exceptions import DomainError, ShockTimeoutError
from ..decomposition import decompose_field
from ..eigensystem import Regime, eigen_analytic
from ..solver import CharTrace, Field, Run, SolverSettings, default_domain, default_launches, simulate
from ..state import U2, U3, PhysParams, State
from .data import InitialData, InitialDataSpec, generate
from .norms import NormReport, compute_norms

logger = logging.getLogger(__name__)

SHOCK_FIT_FLOOR = 0.2
SHOCK_FIT_SAMPLES = 10


def lifespan_bounds(W0: float, c11_0: float, epsilon: float) -> Tuple[float, float]:
    """(T_lo, T_hi) = ((1 + eps)^-3, (1 - eps)^-3) / (|c^1_11(0)| W0)."""
    if not W0 > 0 or c11_0 == 0:
        raise DomainError("Need W0 > 0 and a non-zero c11", argument="W0", value=W0)
    rate = abs(c11_0) * W0
    return 1.0 / ((1.0 + epsilon) ** 3 * rate), 1.0 / ((1.0 - epsilon) ** 3 * rate)


def rho1_envelope(t: np.ndarray | float, W0: float, c11_0: float, epsilon: float) -> Tuple[np.ndarray, np.ndarray]:
    """Lower and upper bounds of rho_1(z0, t) from the two-sided amplitude estimate."""
    t = np.asarray(t, dtype=float)
    rate = abs(c11_0) * W0
    return 1.0 - (1.0 + epsilon) ** 3 * rate * t, 1.0 - (1.0 - epsilon) ** 3 * rate * t


def riccati_bound(W0: float, Gamma: float, t: float) -> float:
    """W0 / (1 - Gamma W0 t), the comparison bound for amplitudes before separation."""
    product = Gamma * W0 * t
    if product >= 1.0:
        raise DomainError("Riccati bound blows up at Gamma W0 t = 1", argument="Gamma*W0*t", value=product)
    return W0 / (1.0 - product)


class ShockReport(msgspec.Struct, kw_only=True):
    T_star: float
    z_star: float
    x_star: Optional[float]
    T_lo: float
    T_hi: float
    tolerance: float
    within_bounds: bool
    W0: float
    c11_0: float
    rho1_curve: List[List[float]]
    w1_max_curve: List[List[float]]
    rho_law_deviation: float
    v1_range: List[float]
    v1_in_band: bool
    w1_growth: float
    min_rho_by_family: Dict[str, float]
    spurious_shock_free: bool
    minimizing_family: int


def _closest_trace(traces: Sequence[CharTrace], z: float) -> CharTrace:
    return min(traces, key=lambda tr: abs(tr.z - z))


def fit_shock_time(trace: CharTrace, rho_floor: float) -> float:
    """Zero of the linear fit over the last samples with rho above the fit floor."""
    floor = max(rho_floor, SHOCK_FIT_FLOOR)
    keep = np.nonzero(trace.rho >= floor)[0]
    if len(keep) < 2:
        raise DomainError("Too few samples above the fit floor", argument="samples", value=int(len(keep)))
    tail = keep[-SHOCK_FIT_SAMPLES:]
    slope, intercept = np.polyfit(trace.t[tail], trace.rho[tail], 1)
    if slope >= 0:
        raise DomainError("Inverse density is not decreasing", argument="slope", value=float(slope))
    return float(-intercept / slope)


def detect_shock(
    run: Run,
    data: InitialData,
    p: PhysParams,
    regime: Optional[Regime] = None,
    *,
    c11_0: Optional[float] = None,
    tolerance: float = 0.1,
) -> ShockReport:
    """Measured T*, the lifespan bounds and the checks that come with them."""
    regime = regime or Regime(run.regime)
    fan = run.traces_of(1)
    min_rho = {
        str(f): float(min(np.min(tr.rho) for tr in run.traces_of(f)))
        for f in range(1, regime.family_count + 1)
        if run.traces_of(f)
    }
    if not run.shocked:
        raise ShockTimeoutError(t_max=run.final.time, min_rho=min_rho.get("1"))

    c11_0 = fast_self_interaction(State.zero(), p, regime) if c11_0 is None else c11_0
    T_lo, T_hi = lifespan_bounds(data.W0, c11_0, p.epsilon)
    steepest = min(fan, key=lambda tr: float(np.min(tr.rho)))
    T_star = fit_shock_time(steepest, run.settings.rho_floor)
    within = T_lo * (1.0 - tolerance) <= T_star <= T_hi * (1.0 + tolerance)

    anchor = _closest_trace(fan, data.z0)
    predicted = 1.0 - abs(c11_0) * data.W0 * anchor.t
    window = (predicted >= SHOCK_FIT_FLOOR) & (anchor.rho >= SHOCK_FIT_FLOOR)
    deviation = float(np.max(np.abs(anchor.rho[window] - predicted[window]) / predicted[window]))
    v1 = anchor.v[window]
    band = ((1.0 - 2.0 * p.epsilon) * data.W0, (1.0 + 2.0 * p.epsilon) * data.W0)
    growth = float(anchor.w[-1] / anchor.w[0]) if anchor.w[0] != 0 else float("inf")

    others = [v for k, v in min_rho.items() if k != "1"]
    minimizing = int(min(min_rho, key=lambda k: min_rho[k]))
    report = ShockReport(
        T_star=T_star,
        z_star=steepest.z,
        x_star=run.shock_position,
        T_lo=T_lo,
        T_hi=T_hi,
        tolerance=tolerance,
        within_bounds=bool(within),
        W0=data.W0,
        c11_0=c11_0,
        rho1_curve=[[float(t), float(r)] for t, r in zip(anchor.t, anchor.rho)],
        w1_max_curve=[[float(t), float(np.max([np.interp(t, tr.t, tr.w) for tr in fan]))] for t in anchor.t],
        rho_law_deviation=deviation,
        v1_range=[float(v1.min()), float(v1.max())],
        v1_in_band=bool(band[0] <= v1.min() and v1.max() <= band[1]),
        w1_growth=growth,
        min_rho_by_family=min_rho,
        spurious_shock_free=bool(all(v > 0.5 for v in others)),
        minimizing_family=minimizing,
    )
    logger.info(
        "Shock detected",
        extra={"T_star": T_star, "T_lo": T_lo, "T_hi": T_hi, "within_bounds": report.within_bounds},
    )
    return report


def _omega_weight(z: np.ndarray, eta: float) -> np.ndarray:
    return np.pi * np.clip((z - eta) * (2.0 * eta - z), 0.0, None)


def dz_rho1_bound(run: Run, t: Optional[float] = None, z_range: Optional[Tuple[float, float]] = None) -> float:
    """max |d rho_1 / dz| over neighbouring family-1 traces, up to time t."""
    fan = sorted(run.traces_of(1), key=lambda tr: tr.z)
    if z_range is not None:
        fan = [tr for tr in fan if z_range[0] <= tr.z <= z_range[1]]
    if len(fan) < 2:
        return 0.0
    z = np.array([tr.z for tr in fan])
    horizon = run.final.time if t is None else t
    times = fan[0].t[fan[0].t <= horizon * (1.0 + 1e-12)]
    rho = np.stack([np.interp(times, tr.t, tr.rho) for tr in fan], axis=1)
    return float(np.max(np.abs(np.gradient(rho, z, axis=1))))


def mean_value_holds(run: Run, z0: float, t: Optional[float] = None) -> bool:
    """rho_1(z, t) - rho_1(z0, t) <= max|d_z rho_1| |z - z0| on every traced z."""
    horizon = run.final.time if t is None else t
    bound = dz_rho1_bound(run, horizon)
    fan = run.traces_of(1)
    anchor = _closest_trace(fan, z0)
    _, rho0 = anchor.at(horizon)
    slack = 1e-12
    return all(tr.at(horizon)[1] - rho0 <= bound * abs(tr.z - anchor.z) + slack for tr in fan)


@dataclass(frozen=True)
class H1Diagnostic:
    t: float
    grid_value: float
    characteristic_value: float
    # (W0/2)^2 / M * ln(1 + M (z0* - z0) / rho_1(z0, t)), M = max |d_z rho_1|
    mean_value_lower_bound: float


def h1_diagnostic(
    run: Run,
    t: float,
    p: PhysParams,
    data: InitialData,
    regime: Optional[Regime] = None,
    region: Optional[Tuple[float, float]] = None,
) -> H1Diagnostic:
    """
    Weighted L^2 norm of w1 over the image of the launch region at time t.

    The grid quadrature integrates |w1|^2 weight(z(x)) dx over [X_1(z_lo, t), X_1(z_hi, t)];
    the characteristic quadrature integrates |v1/rho1|^2 rho1 weight(z) dz over the fan.
    """
    regime = regime or Regime(run.regime)
    eta = data.spec.eta
    z_lo, z_hi = region or (eta, 2.0 * eta)
    fan = sorted((tr for tr in run.traces_of(1) if z_lo <= tr.z <= z_hi), key=lambda tr: tr.z)
    if len(fan) < 3:
        raise DomainError("Too few family-1 traces in the region", argument="traces", value=len(fan))
    z = np.array([tr.z for tr in fan])
    X = np.array([tr.at(t)[0] for tr in fan])
    rho = np.array([tr.at(t)[1] for tr in fan])
    w1_traces = np.array([np.interp(t, tr.t, tr.w) for tr in fan])
    characteristic = float(scipy.integrate.simpson(w1_traces**2 * rho * _omega_weight(z, eta), x=z))

    snap = run.snapshot_at(t)
    x = snap.lab_x
    inside = (x >= X[0]) & (x <= X[-1])
    grid_value = 0.0
    if np.count_nonzero(inside) >= 3:
        w = decompose_field(snap.phi[inside], snap.gradient()[inside], p, regime)[:, 0]
        z_of_x = np.interp(x[inside], X, z)
        grid_value = float(scipy.integrate.simpson(w**2 * _omega_weight(z_of_x, eta), x=x[inside]))

    M = dz_rho1_bound(run, t)
    anchor = _closest_trace(run.traces_of(1), data.z0)
    rho0 = max(anchor.at(t)[1], 1e-300)
    span = data.z0_star - data.z0
    lower = (0.5 * data.W0) ** 2 * (math.log1p(M * span / rho0) / M if M > 0 else span / rho0)
    return H1Diagnostic(t=t, grid_value=grid_value, characteristic_value=characteristic, mean_value_lower_bound=lower)


def vorticity_residuals(run: Run, p: PhysParams) -> Dict[str, float]:
    """
    Euler shear amplitudes: w2 = d_x u2 and w3 = d_x u3 on every snapshot, and u2, u3
    constant along the traces that move with u1.
    """
    regime = Regime.EULER
    identity = 0.0
    for snap in run.snapshots:
        grad = snap.gradient()
        w = decompose_field(snap.phi, grad, p, regime)
        shear = np.abs(w[:, 1:3] - grad[:, [U2, U3]])
        identity = max(identity, float(np.max(shear)))
    transport = 0.0
    for tr in run.traces_of(2):
        transport = max(transport, float(np.max(np.abs(tr.phi[:, U2] - tr.phi[0, U2]))))
    return {"shear_identity": identity, "shear_transport": transport}


@dataclass
class ShockRun:
    data: InitialData
    run: Run
    report: Optional[ShockReport]
    norms: NormReport
    c11_0: float
    T_bounds: Tuple[float, float]


def co_moving_speed(p: PhysParams, regime: Regime) -> float:
    """lambda_1 at the zero state."""
    return float(eigen_analytic(State.zero(), p, regime).lambdas[0])


def initial_field(data: InitialData, settings: SolverSettings, x_lo: float, x_hi: float, frame_speed: float) -> Field:
    field = Field.uniform(x_lo, x_hi, settings.nodes, frame_speed=frame_speed)
    return field.at(data.field.sample(field.x), 0.0)


def run_shock_experiment(
    spec: InitialDataSpec,
    p: PhysParams,
    regime: Optional[Regime] = None,
    *,
    settings: Optional[SolverSettings] = None,
    t_max: Optional[float] = None,
    co_moving: bool = True,
    threads: int = 1,
    require_shock: bool = True,
) -> ShockRun:
    """Generate the data, evolve it with tracing and evaluate the shock report and norms."""
    regime = regime or Regime.for_params(p)
    settings = settings or SolverSettings()
    c11_0 = fast_self_interaction(State.zero(), p, regime)
    data = generate(spec, p, regime)
    T_lo, T_hi = lifespan_bounds(data.W0, c11_0, p.epsilon)
    t_max = 1.5 * T_hi if t_max is None else t_max

    frame_speed = co_moving_speed(p, regime) if co_moving else settings.frame_speed
    if settings.x_lo is not None and settings.x_hi is not None:
        x_lo, x_hi = settings.x_lo, settings.x_hi
    else:
        radius = max(2.0 * data.field.sup_norm, 1e-9)
        x_lo, x_hi = default_domain(p, regime, t_max, frame_speed=frame_speed, radius=radius)
    field0 = initial_field(data, settings, x_lo, x_hi, frame_speed)

    launches = default_launches(regime, spec.eta, settings)
    if all(abs(z - data.z0) > 1e-12 for fam, z in launches if fam == 1):
        launches.append((1, data.z0))
    run = simulate(field0, p, t_max, regime, settings=settings, launches=launches, threads=threads)

    report: Optional[ShockReport] = None
    try:
        report = detect_shock(run, data, p, regime, c11_0=c11_0)
    except ShockTimeoutError:
        if require_shock:
            raise
    norms = compute_norms(run, p, regime)
    return ShockRun(data=data, run=run, report=report, norms=norms, c11_0=c11_0, T_bounds=(T_lo, T_hi))
