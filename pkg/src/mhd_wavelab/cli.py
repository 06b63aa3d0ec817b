"""
Command-line front end.

    mhd-wavelab verify-eigen  --regime euler --output-dir out/
    mhd-wavelab shock-scan    --config lab.ini --set experiment.etas=0.1,0.03,0.01

Every invocation writes ``summary.json`` into the output directory, also when it fails.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import msgspec
import numpy as np
import pandas as pd

from . import __version__
from .artifacts import ensure_output_dir, field_frame, write_summary, write_table
from .coefficients import (
    boundedness_sweep,
    cancellation_sweep,
    coefficient_table,
    fast_self_interaction,
    fd_gamma_oracle,
    sample_ball,
)
from .config import Command, LabConfig, load_config
from .converters import ExceptionConverter
from .core.error_codes import EXIT_CODE_MAP, LabErrorCode
from .core.exceptions import (
    ConfigError,
    DomainError,
    GeometryError,
    InvariantFailure,
    LabError,
    OracleConvergenceError,
    StencilError,
)
from .core.renderers import ErrorRenderer, RenderFormat
from .eigensystem import (
    EigenSystem,
    Regime,
    basis_normalization,
    build_matrix,
    eigen_analytic,
    eigen_batch,
    eigen_numeric_oracle,
    eigen_residual,
    eigen_rows,
)
from .experiments import (
    InitialDataKind,
    InitialDataSpec,
    ScanJob,
    bootstrap_check,
    doubling_ratios,
    eta_jobs,
    h1_blowup_check,
    h1_diagnostic,
    h1_norm_scaling,
    lifespan_bounds,
    mean_value_holds,
    refinement_jobs,
    run_scan,
    run_shock_experiment,
    scan_row,
    strip_geometry,
    strips_separated,
    vorticity_residuals,
    w0_doubling_jobs,
)
from .experiments.scans import monotone, rows_to_records
from .experiments.shock import ShockRun
from .i18n import MessageCatalog
from .solver import Run, rho_consistency, trace_characteristic, transport_residual
from .state import COMPONENT_NAMES, State

logger = logging.getLogger(__name__)

DUALITY_TOLERANCE = 1e-10
ORACLE_TOLERANCE = 1e-8
EIGEN_RESIDUAL_TOLERANCE = 1e-9
C11_ORIGIN_TOLERANCE = 1e-10
FD_ORACLE_TOLERANCE = 1e-5
FD_ORACLE_SAMPLES = 1000
SCALING_TOLERANCE = 0.1
REFINEMENT_FACTOR = 2.0

# eigenvalue multiplicities at the zero state, fastest first
EXPECTED_MULTIPLICITIES: Dict[Regime, List[int]] = {
    Regime.MHD: [1, 2, 1, 2, 1],
    Regime.H1ZERO: [1, 5, 1],
    Regime.EULER: [1, 3, 1],
}


@dataclass
class CommandResult:
    payload: Dict[str, Any]
    failed: List[str] = field(default_factory=list)
    module: str = "cli"


# ---------------------------------------------------------------------------
# verify-eigen


def multiplicities(lambdas: np.ndarray, tol: float = 1e-9) -> List[int]:
    counts = [1]
    for a, b in zip(lambdas[:-1], lambdas[1:]):
        if abs(a - b) <= tol * (1.0 + abs(a)):
            counts[-1] += 1
        else:
            counts.append(1)
    return counts


def verify_eigen(config: LabConfig, output_dir: Path) -> CommandResult:
    p, regime = config.params, config.regime
    phi = sample_ball(p, config.experiment.samples, config.run.seed, regime)
    lam, right, left = eigen_batch(phi, p, regime)
    eye = np.eye(regime.dimension)
    duality = float(np.max(np.abs(np.einsum("nij,njk->nik", left, right) - eye)))

    def check(index: int) -> tuple[float, float]:
        es = EigenSystem(lambdas=lam[index], right=right[index], left=left[index], regime=regime)
        m = build_matrix(State.of(phi[index]), p, regime)
        return float(np.max(np.abs(eigen_numeric_oracle(m) - lam[index]))), eigen_residual(es, m)

    with ThreadPoolExecutor(max_workers=config.run.threads) as pool:
        checks = list(pool.map(check, range(len(phi))))
    oracle = max(c[0] for c in checks)
    residual = max(c[1] for c in checks)

    origin = eigen_analytic(State.zero(), config.params, regime, basis_normalization(regime))
    found = multiplicities(origin.lambdas)
    write_table(output_dir, "eigen.csv", eigen_rows(origin))

    failed = []
    if duality > DUALITY_TOLERANCE:
        failed.append("duality")
    if oracle > ORACLE_TOLERANCE:
        failed.append("oracle")
    if residual > EIGEN_RESIDUAL_TOLERANCE:
        failed.append("eigen_residual")
    if found != EXPECTED_MULTIPLICITIES[regime]:
        failed.append("multiplicities")
    payload = {
        "regime": regime.value,
        "samples": len(phi),
        "duality_max": duality,
        "oracle_max": oracle,
        "eigen_residual_max": residual,
        "multiplicities": found,
        "origin_lambdas": origin.lambdas,
    }
    return CommandResult(payload, failed, module="eigensystem")


# ---------------------------------------------------------------------------
# verify-coeffs


def c11_origin_expected(config: LabConfig) -> float:
    """(a - q)(gamma + 1) / (2 c) at the zero state, c the sound speed."""
    p, regime = config.params, config.regime
    a = p.mu0 * regime.longitudinal_field(p) ** 2
    q = p.A * p.gamma
    return (a - q) * (p.gamma + 1.0) / (2.0 * math.sqrt(q))


def fd_oracle_sample(config: LabConfig, n: int) -> Dict[str, Any]:
    """Analytic gamma against the finite-difference oracle on random states and indices."""
    p, regime = config.params, config.regime
    seed = config.run.seed
    states = sample_ball(p, n, seed + 1, regime, radius=p.delta)
    families = range(1, regime.family_count + 1)
    admissible = [(i, k, m) for i in families for k in families for m in families if k != m and m != i]
    rng = np.random.default_rng(seed + 2)
    indices = [admissible[j] for j in rng.integers(len(admissible), size=n)]

    def compare(j: int) -> Optional[float]:
        state = State.of(states[j])
        i, k, m = indices[j]
        analytic = float(coefficient_table(state, p, regime).gamma[i - 1, k - 1, m - 1])
        try:
            fd = fd_gamma_oracle(i, k, m, state, p, regime=regime)
        except StencilError:
            return None
        except OracleConvergenceError:
            return math.inf
        return abs(analytic - fd) / max(1.0, abs(analytic))

    with ThreadPoolExecutor(max_workers=config.run.threads) as pool:
        errors = list(pool.map(compare, range(n)))
    kept = [e for e in errors if e is not None and math.isfinite(e)]
    unconverged = sum(1 for e in errors if e is not None and not math.isfinite(e))
    return {
        "samples": n,
        "skipped": errors.count(None),
        "unconverged": unconverged,
        "max_relative_error": max(kept) if kept else 0.0,
    }


def verify_coeffs(config: LabConfig, output_dir: Path) -> CommandResult:
    p, regime = config.params, config.regime
    sweep = boundedness_sweep(
        p, config.experiment.samples, seed=config.run.seed, regime=regime, threads=config.run.threads
    )
    failed = list(sweep.failed)

    c11_0 = fast_self_interaction(State.zero(), p, regime)
    expected = c11_origin_expected(config)
    if abs(c11_0 - expected) > C11_ORIGIN_TOLERANCE:
        failed.append("c11_origin")

    oracle = fd_oracle_sample(config, min(FD_ORACLE_SAMPLES, config.experiment.samples))
    if oracle["max_relative_error"] > FD_ORACLE_TOLERANCE or oracle["unconverged"]:
        failed.append("fd_oracle")

    levels = []
    if regime is Regime.MHD:
        levels = cancellation_sweep(p, seed=config.run.seed)
        write_table(output_dir, "cancellation.csv", [msgspec.to_builtins(level) for level in levels])
        peaks = [level.coefficient_max for level in levels]
        # bounded: the deepest level may not exceed the shallowest by more than a constant factor
        if peaks[-1] > 10.0 * max(peaks[0], 1.0):
            failed.append("cancellation")

    payload = {
        "regime": regime.value,
        "sweep": sweep,
        "c11_origin": c11_0,
        "c11_origin_expected": expected,
        "fd_oracle": oracle,
        "cancellation": levels,
    }
    return CommandResult(payload, failed, module="coefficients")


# ---------------------------------------------------------------------------
# simulate / trace


def data_spec(config: LabConfig, **overrides: Any) -> InitialDataSpec:
    return InitialDataSpec.from_params(
        config.params, config.experiment.kind, quad_points=config.experiment.quad_points, **overrides
    )


def traces_frame(run: Run) -> pd.DataFrame:
    parts = [
        pd.DataFrame(
            {
                "family": tr.family,
                "z": tr.z,
                "t": tr.t,
                "X": tr.X,
                "rho": tr.rho,
                "w": tr.w,
            }
        )
        for tr in run.traces
    ]
    return pd.concat(parts, ignore_index=True) if parts else pd.DataFrame()


def _h1_series(outcome: ShockRun, config: LabConfig) -> List[Dict[str, float]]:
    """H1 diagnostic at T* - Delta on this run's own grid, Delta halving over a factor 8."""
    report = outcome.report
    if report is None:
        return []
    final = outcome.run.final.time
    first = 0.5 * report.T_star
    series = []
    for k in range(4):
        t = min(report.T_star - first * 2.0**-k, final)
        try:
            diag = h1_diagnostic(outcome.run, t, config.params, outcome.data, config.regime)
        except DomainError:
            break
        series.append(msgspec.to_builtins(diag))
    return series


def _geometry(config: LabConfig, outcome: ShockRun) -> Optional[Dict[str, Any]]:
    radius = max(2.0 * outcome.data.field.sup_norm, 1e-9)
    try:
        return msgspec.to_builtins(strip_geometry(config.params, config.regime, seed=config.run.seed, radius=radius))
    except GeometryError as exc:
        logger.warning("Strips never separate for this data", extra={"sigma": exc.details.get("sigma")})
        return None


def simulate_command(config: LabConfig, output_dir: Path) -> CommandResult:
    regime = config.regime
    spec = data_spec(config)
    outcome = run_shock_experiment(
        spec,
        config.params,
        regime,
        settings=config.solver,
        t_max=config.experiment.t_max,
        co_moving=config.experiment.co_moving,
        threads=config.run.threads,
        require_shock=False,
    )
    run = outcome.run
    final = run.final
    write_table(output_dir, "field.csv", field_frame(final.lab_x, final.phi, COMPONENT_NAMES))
    write_table(output_dir, "traces.csv", traces_frame(run))
    job = ScanJob(label="run", spec=spec, params=config.params, settings=config.solver)
    bootstrap = bootstrap_check([scan_row(job, outcome)])

    payload: Dict[str, Any] = {
        "regime": regime.value,
        "stop_reason": run.stop_reason.value,
        "steps": run.steps,
        "final_time": final.time,
        "shock_time": run.shock_time,
        "shock_position": run.shock_position,
        "W0": outcome.data.W0,
        "z0": outcome.data.z0,
        "z0_star": outcome.data.z0_star,
        "c11_origin": outcome.c11_0,
        "T_bounds": list(outcome.T_bounds),
        "report": outcome.report,
        "norm_ratios": outcome.norms.ratios(outcome.data.spec.theta, outcome.data.spec.eta, outcome.data.W0),
        "min_rho_by_family": outcome.norms.min_rho,
        "max_w_by_family": outcome.norms.max_w,
        "strips_separated": strips_separated(run, regime, final.time),
        "mean_value_holds": mean_value_holds(run, outcome.data.z0),
        "geometry": _geometry(config, outcome),
        "bootstrap_K": bootstrap.K,
        "h1_diagnostic": _h1_series(outcome, config),
    }
    if regime is Regime.EULER:
        payload["vorticity"] = vorticity_residuals(run, config.params)
    return CommandResult(payload, bootstrap.failed, module="solver")


def _launch_points(config: LabConfig) -> np.ndarray:
    exp = config.experiment
    if exp.trace_count == 1:
        return np.array([exp.trace_z])
    return exp.trace_z + config.params.eta * np.linspace(-1.0, 1.0, exp.trace_count)


def trace_command(config: LabConfig, output_dir: Path) -> CommandResult:
    """Transport residuals along traces of one family, optionally over a refinement ladder."""
    p, regime, exp = config.params, config.regime, config.experiment
    spec = data_spec(config)
    if exp.t_max is None:
        # smooth pre-shock window
        c11_0 = fast_self_interaction(State.zero(), p, regime)
        t_window = 0.5 * lifespan_bounds(spec.theta, c11_0, p.epsilon)[0]
    else:
        t_window = exp.t_max
    ladder = list(exp.refinements) or [config.solver.nodes]

    rows: List[Dict[str, Any]] = []
    sups: List[Dict[str, float]] = []
    for nodes in ladder:
        settings = msgspec.structs.replace(config.solver, nodes=nodes)
        outcome = run_shock_experiment(
            spec,
            p,
            regime,
            settings=settings,
            t_max=t_window,
            co_moving=exp.co_moving,
            threads=config.run.threads,
            require_shock=False,
        )
        level = {"nodes": nodes, "w": 0.0, "v": 0.0, "rho": 0.0, "rho_consistency": 0.0}
        for z in _launch_points(config):
            trace = trace_characteristic(outcome.run, exp.trace_family, float(z), p, regime)
            residual = transport_residual(trace, p, regime)
            row = {
                "nodes": nodes,
                "family": exp.trace_family,
                "z": float(z),
                "samples": len(trace.t),
                "w": float(np.max(residual.w, initial=0.0)),
                "v": float(np.max(residual.v, initial=0.0)),
                "rho": float(np.max(residual.rho, initial=0.0)),
                "rho_consistency": rho_consistency(trace, p, regime),
            }
            rows.append(row)
            for key in ("w", "v", "rho", "rho_consistency"):
                level[key] = max(level[key], row[key])
        sups.append(level)
        logger.info("Trace residuals", extra=level)
    write_table(output_dir, "trace.csv", rows)

    orders = [
        math.log(a["v"] / b["v"], REFINEMENT_FACTOR) if a["v"] > 0 and b["v"] > 0 else float("inf")
        for a, b in zip(sups[:-1], sups[1:])
    ]
    failed = ["transport_order"] if any(order < 1.0 for order in orders) else []
    payload = {
        "regime": regime.value,
        "family": exp.trace_family,
        "t_window": t_window,
        "levels": sups,
        "observed_orders": orders,
    }
    return CommandResult(payload, failed, module="solver")


# ---------------------------------------------------------------------------
# shock-scan


def _scaling_failures(rows: Sequence[Any], factors: Sequence[float]) -> tuple[List[float], List[str]]:
    ratios = doubling_ratios(rows)
    expected = [b / a for a, b in zip(factors[:-1], factors[1:])]
    failed = []
    if len(ratios) != len(expected):
        failed.append("scaling_law")
    else:
        for got, want in zip(ratios, expected):
            if abs(got / want - 1.0) > SCALING_TOLERANCE:
                failed.append("scaling_law")
                break
    return ratios, failed


def shock_scan(config: LabConfig, output_dir: Path) -> CommandResult:
    p, regime, exp = config.params, config.regime, config.experiment
    spec = data_spec(config)
    failed: List[str] = []
    payload: Dict[str, Any] = {"regime": regime.value, "kind": exp.kind.value}

    if exp.kind is InitialDataKind.ILLPOSEDNESS:
        etas = sorted(exp.etas, reverse=True)
        jobs = eta_jobs(spec, p, config.solver, etas)
    else:
        jobs = []
        for eta in exp.etas:
            spec_eta = msgspec.structs.replace(spec, eta=eta)
            p_eta = msgspec.structs.replace(p, eta=eta)
            for job in w0_doubling_jobs(spec_eta, p_eta, config.solver, exp.w0_factors):
                jobs.append(msgspec.structs.replace(job, label=f"eta={eta:g},{job.label}"))
    group_size = len(jobs)
    if exp.refinements:
        jobs.extend(refinement_jobs(spec, p, config.solver, exp.refinements))
    jobs = [msgspec.structs.replace(job, t_max=exp.t_max, co_moving=exp.co_moving) for job in jobs]

    rows = run_scan(jobs, regime, threads=config.run.threads)
    write_table(output_dir, "scan.csv", rows_to_records(rows))
    main_rows, ladder = rows[:group_size], rows[group_size:]

    for row in rows:
        if row.error_code is not None:
            failed.append(f"run_failed:{row.label}")
        elif row.within_bounds is False:
            failed.append(f"lifespan:{row.label}")
        if row.min_rho_other is not None and row.min_rho_other <= 0.5:
            failed.append(f"spurious_shock:{row.label}")
    bootstrap = bootstrap_check(rows)
    payload["bootstrap_K"] = bootstrap.K
    failed.extend(bootstrap.failed)

    if exp.kind is InitialDataKind.ILLPOSEDNESS:
        payload["etas"] = etas
        payload["T_star_decreasing"] = monotone([r.T_star for r in main_rows], decreasing=True)
        payload["W0_increasing"] = monotone([r.W0 for r in main_rows], decreasing=False)
        payload["h1_scaling"] = [
            msgspec.to_builtins(h1_norm_scaling(msgspec.structs.replace(spec, eta=eta))) for eta in etas
        ]
        if len(main_rows) > 1 and not (payload["T_star_decreasing"] and payload["W0_increasing"]):
            failed.append("instantaneous_shock")
    else:
        per_eta: Dict[str, List[float]] = {}
        count = len(exp.w0_factors)
        for e, eta in enumerate(exp.etas):
            ratios, scale_failed = _scaling_failures(main_rows[e * count : (e + 1) * count], exp.w0_factors)
            per_eta[f"{eta:g}"] = ratios
            if count > 1:
                failed.extend(f"{name}:eta={eta:g}" for name in scale_failed)
        payload["doubling_ratios"] = per_eta

    if ladder:
        dz = [r.dz_rho1 for r in ladder if r.dz_rho1 is not None]
        spread = max(dz) / min(dz) if dz and min(dz) > 0 else float("inf")
        payload["dz_rho1_refinement_spread"] = spread
        if len(dz) > 1 and spread > 2.0:
            failed.append("dz_rho1_refinement")
        if len(ladder) > 1:
            blowup = h1_blowup_check(ladder)
            payload["h1_blowup"] = blowup
            if not blowup.passed:
                failed.append("h1_blowup")

    payload["runs"] = len(rows)
    return CommandResult(payload, failed, module="experiments")


COMMANDS: Dict[Command, Callable[[LabConfig, Path], CommandResult]] = {
    Command.VERIFY_EIGEN: verify_eigen,
    Command.VERIFY_COEFFS: verify_coeffs,
    Command.SIMULATE: simulate_command,
    Command.TRACE: trace_command,
    Command.SHOCK_SCAN: shock_scan,
}


# ---------------------------------------------------------------------------
# entry point


def exit_code_table() -> str:
    lines = ["exit status:", "  0  success", "  2  command-line usage error"]
    for code, status in sorted(EXIT_CODE_MAP.items(), key=lambda item: item[1]):
        lines.append(f"  {status:<2} {code.value}")
    return "\n".join(lines)


def build_parser(catalog: Optional[MessageCatalog] = None) -> argparse.ArgumentParser:
    catalog = catalog or MessageCatalog()
    parser = argparse.ArgumentParser(
        prog="mhd-wavelab",
        description="Wave decomposition, interaction coefficients and shock formation for planar MHD.",
        epilog=exit_code_table(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", nargs="?", choices=[c.value for c in Command], help="pipeline to run")
    parser.add_argument("--config", type=Path, help="INI file with [params] [solver] [experiment] [run]")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one config value; repeatable",
    )
    parser.add_argument("--regime", choices=[r.value for r in Regime])
    parser.add_argument("--output-dir", type=Path)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file", type=Path)
    parser.add_argument(
        "--locale",
        default=catalog.default_locale,
        choices=catalog.get_available_locales(),
        help="language of error messages",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def configure_logging(level: str, log_file: Optional[Path] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )


def render_error(error: LabError, catalog: MessageCatalog, locale: str) -> tuple[Dict[str, Any], str]:
    message = catalog.translate(error.code.value, locale, error.details)
    block = ErrorRenderer(RenderFormat.JSON).render(error, message=message).payload
    line = ErrorRenderer(RenderFormat.TEXT).render(error, message=message).payload
    return block["error"], line


def _log_failure(error: LabError) -> None:
    quiet = error.code in (LabErrorCode.INVARIANT_FAILED, LabErrorCode.SHOCK_TIMEOUT)
    logger.log(
        logging.WARNING if quiet else logging.ERROR,
        error.message,
        extra={"error_code": error.code.value, "lab_module": error.module},
        exc_info=logger.isEnabledFor(logging.DEBUG),
    )


def dispatch(config: LabConfig, summary: Dict[str, Any]) -> Path:
    """Dispatch the configured command; the result lands in ``summary`` before any invariant failure is raised."""
    command = config.run.command
    if command is None:
        raise ConfigError("No command given", section="run", key="command")
    output_dir = ensure_output_dir(config.run.output_dir)
    summary["command"] = command.value
    summary["config"] = config.to_dict()
    result = COMMANDS[command](config, output_dir)
    summary["result"] = result.payload
    if result.failed:
        raise InvariantFailure(failed=result.failed, module=result.module)
    return output_dir


def main(argv: Optional[Sequence[str]] = None) -> int:
    catalog = MessageCatalog()
    args = build_parser(catalog).parse_args(argv)
    configure_logging(args.log_level, args.log_file)

    summary: Dict[str, Any] = {"version": __version__, "command": args.command, "status": "ok"}
    output_dir = Path(args.output_dir or "results")
    status = 0
    try:
        config = load_config(
            args.config,
            args.set,
            flags={
                "run": {
                    "command": args.command,
                    "regime": args.regime,
                    "output_dir": args.output_dir,
                    "seed": args.seed,
                    "threads": args.threads,
                }
            },
        )
        output_dir = Path(config.run.output_dir)
        dispatch(config, summary)
    except Exception as exc:  # noqa: BLE001 - every failure ends up in summary.json
        error = ExceptionConverter.convert(exc)
        _log_failure(error)
        block, line = render_error(error, catalog, args.locale)
        summary["status"] = "failed"
        summary["error"] = block
        print(line, file=sys.stderr)
        status = error.exit_code

    try:
        ensure_output_dir(output_dir)
        write_summary(output_dir, summary)
    except LabError as exc:
        _log_failure(exc)
        print(render_error(exc, catalog, args.locale)[1], file=sys.stderr)
        return status or exc.exit_code
    return status


if __name__ == "__main__":
    raise SystemExit(main())
