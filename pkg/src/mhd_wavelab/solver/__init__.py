from .field import CharTrace, Field, Run, SolverSettings, StopReason
from .scheme import UpwindScheme, default_domain, simulate, speed_bounds, step_field
from .tracing import (
    Intersection,
    TransportResidual,
    bicharacteristic_intersection,
    default_launches,
    rho_consistency,
    trace_characteristic,
    transport_residual,
)

__all__ = [
    "CharTrace",
    "Field",
    "Intersection",
    "Run",
    "SolverSettings",
    "StopReason",
    "TransportResidual",
    "UpwindScheme",
    "bicharacteristic_intersection",
    "default_domain",
    "default_launches",
    "rho_consistency",
    "simulate",
    "speed_bounds",
    "step_field",
    "trace_characteristic",
    "transport_residual",
]
