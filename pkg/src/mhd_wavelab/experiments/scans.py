"""Parameter scans run as independent jobs: W0 doubling, eta sweeps and grid refinement."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

import msgspec

from ..core.exceptions import DomainError, LabError
from ..eigensystem import Regime
from ..solver import SolverSettings
from ..state import PhysParams
from .data import InitialDataSpec
from .shock import ShockRun, dz_rho1_bound, h1_diagnostic, run_shock_experiment

logger = logging.getLogger(__name__)

# bootstrap conclusions of every pre-shock run: S <= 2, J <= 2 W0, V and W_check <= K eta W0^2
S_BOUND = 2.0
J_BOUND = 2.0
K_BOUND = 50.0
# sup |w_i| over families i != 1, in units of theta
AMPLITUDE_BOUND = 10.0
# the H1 proxy is read at T* (1 - offset); offsets shrink by H1_OFFSET_RANGE over a ladder
H1_FIRST_OFFSET = 0.25
H1_OFFSET_RANGE = 8.0
H1_MIN_GROWTH = 3.0


class ScanJob(msgspec.Struct, kw_only=True, frozen=True):
    label: str
    spec: InitialDataSpec
    params: PhysParams
    settings: SolverSettings
    t_max: Optional[float] = None
    co_moving: bool = True
    h1_offset: Optional[float] = None


class ScanRow(msgspec.Struct, kw_only=True):
    """One CSV row per run; failed runs carry the error code and no lifespan."""

    label: str
    kind: str
    eta: float
    theta: float
    nodes: int
    W0: float
    T_lo: float
    T_star: Optional[float] = None
    T_hi: float
    within_bounds: Optional[bool] = None
    rho_law_deviation: Optional[float] = None
    min_rho_other: Optional[float] = None
    S_max: Optional[float] = None
    J_over_W0: Optional[float] = None
    V_over_eta_W0sq: Optional[float] = None
    W_check_over_eta_W0sq: Optional[float] = None
    U_bar_over_eta_W0: Optional[float] = None
    max_w_other: Optional[float] = None
    dz_rho1: Optional[float] = None
    h1_offset: Optional[float] = None
    h1_value: Optional[float] = None
    error_code: Optional[str] = None


def _h1_value(job: ScanJob, outcome: ShockRun) -> Optional[float]:
    report = outcome.report
    if job.h1_offset is None or report is None:
        return None
    t = min(report.T_star * (1.0 - job.h1_offset), outcome.run.final.time)
    try:
        return h1_diagnostic(outcome.run, t, job.params, outcome.data).characteristic_value
    except DomainError:
        return None


def scan_row(job: ScanJob, outcome: ShockRun) -> ScanRow:
    ratios = outcome.norms.ratios(job.spec.theta, job.spec.eta, outcome.data.W0)
    report = outcome.report
    others = [v for k, v in outcome.norms.min_rho.items() if k != "1"]
    amplitudes = [v for k, v in outcome.norms.max_w.items() if k != "1"]
    return ScanRow(
        label=job.label,
        kind=job.spec.kind.value,
        eta=job.spec.eta,
        theta=job.spec.theta,
        nodes=job.settings.nodes,
        W0=outcome.data.W0,
        T_lo=outcome.T_bounds[0],
        T_star=report.T_star if report else None,
        T_hi=outcome.T_bounds[1],
        within_bounds=report.within_bounds if report else None,
        rho_law_deviation=report.rho_law_deviation if report else None,
        min_rho_other=min(others) if others else None,
        S_max=ratios["S_max"],
        J_over_W0=ratios["J_over_W0"],
        V_over_eta_W0sq=ratios["V_over_eta_W0sq"],
        W_check_over_eta_W0sq=ratios["W_check_over_eta_W0sq"],
        U_bar_over_eta_W0=ratios["U_bar_over_eta_W0"],
        max_w_other=max(amplitudes) if amplitudes else None,
        dz_rho1=dz_rho1_bound(outcome.run),
        h1_offset=job.h1_offset,
        h1_value=_h1_value(job, outcome),
    )


def _run_job(job: ScanJob, regime: Regime) -> ScanRow:
    try:
        outcome = run_shock_experiment(
            job.spec,
            job.params,
            regime,
            settings=job.settings,
            t_max=job.t_max,
            co_moving=job.co_moving,
        )
    except LabError as exc:
        logger.warning(
            "Scan job failed",
            extra={"label": job.label, "error_code": exc.code.value, "lab_module": exc.module},
        )
        return ScanRow(
            label=job.label,
            kind=job.spec.kind.value,
            eta=job.spec.eta,
            theta=job.spec.theta,
            nodes=job.settings.nodes,
            W0=float("nan"),
            T_lo=float("nan"),
            T_hi=float("nan"),
            error_code=str(exc.code),
        )
    return scan_row(job, outcome)


def run_scan(jobs: Sequence[ScanJob], regime: Regime, threads: int = 1) -> List[ScanRow]:
    """Run every job; rows come back in job order whatever the worker count."""
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(lambda job: _run_job(job, regime), jobs))


def w0_doubling_jobs(
    spec: InitialDataSpec,
    p: PhysParams,
    settings: SolverSettings,
    factors: Sequence[float] = (1.0, 2.0, 4.0),
) -> List[ScanJob]:
    jobs = []
    for factor in factors:
        theta = spec.theta * factor
        jobs.append(
            ScanJob(
                label=f"W0x{factor:g}",
                spec=msgspec.structs.replace(spec, theta=theta),
                params=msgspec.structs.replace(p, theta=theta),
                settings=settings,
            )
        )
    return jobs


def eta_jobs(
    spec: InitialDataSpec,
    p: PhysParams,
    settings: SolverSettings,
    etas: Sequence[float],
) -> List[ScanJob]:
    return [
        ScanJob(
            label=f"eta={eta:g}",
            spec=msgspec.structs.replace(spec, eta=eta),
            params=msgspec.structs.replace(p, eta=eta),
            settings=settings,
        )
        for eta in etas
    ]


def h1_offsets(count: int) -> List[float]:
    """Offsets Delta / T* shrinking geometrically by H1_OFFSET_RANGE over ``count`` grids."""
    if count == 1:
        return [H1_FIRST_OFFSET]
    return [H1_FIRST_OFFSET * H1_OFFSET_RANGE ** (-k / (count - 1)) for k in range(count)]


def refinement_jobs(
    spec: InitialDataSpec,
    p: PhysParams,
    settings: SolverSettings,
    nodes: Sequence[int],
) -> List[ScanJob]:
    """One job per grid, coarse to fine; finer grids read the H1 proxy closer to T*."""
    ladder = sorted(nodes)
    return [
        ScanJob(
            label=f"nodes={n}",
            spec=spec,
            params=p,
            settings=msgspec.structs.replace(settings, nodes=n),
            h1_offset=offset,
        )
        for n, offset in zip(ladder, h1_offsets(len(ladder)))
    ]


def doubling_ratios(rows: Sequence[ScanRow]) -> List[float]:
    """T*(W0) / T*(2 W0) for consecutive rows; 2 is the scaling-law value."""
    ratios = []
    for a, b in zip(rows[:-1], rows[1:]):
        if a.T_star and b.T_star:
            ratios.append(a.T_star / b.T_star)
    return ratios


def monotone(values: Sequence[Optional[float]], decreasing: bool = True) -> bool:
    clean = [v for v in values if v is not None]
    if len(clean) != len(values) or len(clean) < 2:
        return False
    pairs = zip(clean[:-1], clean[1:])
    return all(b < a for a, b in pairs) if decreasing else all(b > a for a, b in pairs)


def rows_to_records(rows: Sequence[ScanRow]) -> List[Dict[str, Any]]:
    return [msgspec.to_builtins(row) for row in rows]


class BootstrapCheck(msgspec.Struct, kw_only=True):
    # single constant with V, W_check <= K eta W0^2 over every finished run
    K: float
    failed: List[str]


def bootstrap_check(rows: Sequence[ScanRow]) -> BootstrapCheck:
    """S, J and the off-family amplitudes per run, then one K across all runs."""
    K = 0.0
    failed: List[str] = []
    for row in rows:
        if row.error_code is not None or row.S_max is None:
            continue
        scaled = [v for v in (row.V_over_eta_W0sq, row.W_check_over_eta_W0sq) if v is not None]
        within = row.S_max <= S_BOUND and row.J_over_W0 is not None and row.J_over_W0 <= J_BOUND
        if not within or any(math.isnan(v) for v in scaled):
            failed.append(f"bootstrap_ratios:{row.label}")
        if row.max_w_other is not None and not row.max_w_other <= AMPLITUDE_BOUND * row.theta:
            failed.append(f"spurious_amplitude:{row.label}")
        K = max([K, *(v for v in scaled if not math.isnan(v))])
    if K > K_BOUND:
        failed.append("bootstrap_K")
    return BootstrapCheck(K=K, failed=failed)


class BlowupCheck(msgspec.Struct, kw_only=True):
    offsets: List[float]
    values: List[Optional[float]]
    growth: Optional[float]
    passed: bool


def h1_blowup_check(rows: Sequence[ScanRow]) -> BlowupCheck:
    """The H1 proxy must grow monotonically by H1_MIN_GROWTH as the offset to T* shrinks."""
    ladder = sorted((r for r in rows if r.h1_offset is not None), key=lambda r: r.h1_offset, reverse=True)
    values = [r.h1_value for r in ladder]
    growth = None
    if len(values) >= 2 and values[0] is not None and values[-1] is not None and values[0] > 0:
        growth = values[-1] / values[0]
    passed = growth is not None and growth >= H1_MIN_GROWTH and monotone(values, decreasing=False)
    return BlowupCheck(offsets=[r.h1_offset for r in ladder], values=values, growth=growth, passed=passed)
