from .data import (
    H1Scaling,
    InitialData,
    InitialDataKind,
    InitialDataSpec,
    bump,
    gen_illposedness_data,
    gen_shock_data,
    generate,
    h1_norm_scaling,
    mollifier,
)
from .geometry import FAMILY_GROUPS, StripGeometry, strip_geometry, strips_separated
from .norms import NormReport, compute_norms
from .scans import (
    BlowupCheck,
    BootstrapCheck,
    ScanJob,
    ScanRow,
    bootstrap_check,
    doubling_ratios,
    eta_jobs,
    h1_blowup_check,
    refinement_jobs,
    run_scan,
    scan_row,
    w0_doubling_jobs,
)
from .shock import (
    H1Diagnostic,
    ShockReport,
    ShockRun,
    detect_shock,
    dz_rho1_bound,
    h1_diagnostic,
    lifespan_bounds,
    mean_value_holds,
    rho1_envelope,
    riccati_bound,
    run_shock_experiment,
    vorticity_residuals,
)

__all__ = [
    "FAMILY_GROUPS",
    "BlowupCheck",
    "BootstrapCheck",
    "H1Diagnostic",
    "H1Scaling",
    "InitialData",
    "InitialDataKind",
    "InitialDataSpec",
    "NormReport",
    "ScanJob",
    "ScanRow",
    "ShockReport",
    "ShockRun",
    "StripGeometry",
    "bootstrap_check",
    "bump",
    "compute_norms",
    "detect_shock",
    "doubling_ratios",
    "dz_rho1_bound",
    "eta_jobs",
    "gen_illposedness_data",
    "gen_shock_data",
    "generate",
    "h1_blowup_check",
    "h1_diagnostic",
    "h1_norm_scaling",
    "lifespan_bounds",
    "mean_value_holds",
    "mollifier",
    "refinement_jobs",
    "rho1_envelope",
    "riccati_bound",
    "run_scan",
    "run_shock_experiment",
    "scan_row",
    "strip_geometry",
    "strips_separated",
    "vorticity_residuals",
    "w0_doubling_jobs",
]
