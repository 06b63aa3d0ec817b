"""Initial-data families: the shock family and the logarithmic ill-posedness family."""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from enum import StrEnum
from typing import Optional, Tuple

import msgspec
import numpy as np
import scipy.integrate
import scipy.interpolate

from ..core.exceptions import ParamsError, QuadratureError
from ..decomposition import ProfileField, ProfileSet, integrate_profile
from ..eigensystem import Regime
from ..state import PhysParams

logger = logging.getLogger(__name__)

QUADRATURE_TOLERANCE = 1e-6
WINDOW_CHUNK = 128


class InitialDataKind(StrEnum):
    SHOCK = "shock"
    ILLPOSEDNESS = "illposedness"


class InitialDataSpec(msgspec.Struct, kw_only=True, frozen=True):
    kind: InitialDataKind = InitialDataKind.SHOCK
    theta: float = 0.01
    eta: float = 0.1
    alpha: float = 0.25
    # constant of the amplitude hierarchy for the non-leading families
    C: float = 1.0
    quad_points: int = 4096
    profile_points: int = 1025

    def __post_init__(self) -> None:
        if not self.theta > 0:
            raise ParamsError("theta must be positive", field="theta", value=self.theta, bound="> 0")
        if not self.eta > 0:
            raise ParamsError("eta must be positive", field="eta", value=self.eta, bound="> 0")
        if not 0 < self.alpha < 0.5:
            raise ParamsError("alpha must lie in (0, 1/2)", field="alpha", value=self.alpha, bound="(0, 1/2)")
        if self.quad_points < 2**12:
            raise ParamsError(
                "Quadrature needs at least 4096 points", field="quad_points", value=self.quad_points, bound=">= 4096"
            )
        if self.profile_points < 17:
            raise ParamsError(
                "Too few profile points", field="profile_points", value=self.profile_points, bound=">= 17"
            )

    @classmethod
    def from_params(cls, p: PhysParams, kind: InitialDataKind = InitialDataKind.SHOCK, **overrides) -> "InitialDataSpec":
        values = {"kind": kind, "theta": p.theta, "eta": p.eta, "alpha": p.alpha}
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class InitialData:
    spec: InitialDataSpec
    regime: Regime
    profiles: ProfileSet
    field: ProfileField
    W0: float
    z0: float
    # right end of the interval past z0 where w1 stays above W0 / 2
    z0_star: float


def bump(y: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - y^2)) on |y| < 1, peak 1 at the origin."""
    y = np.asarray(y, dtype=float)
    inside = np.abs(y) < 1.0
    safe = np.where(inside, y, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe**2)), 0.0)


@functools.cache
def _unit_mollifier_mass() -> float:
    value, _ = scipy.integrate.quad(lambda y: math.exp(-1.0 / (1.0 - y * y)), -1.0, 1.0, epsabs=1e-14)
    return value


def mollifier(z: np.ndarray, width: float) -> np.ndarray:
    """Unit-mass smooth bump supported in |z| < width."""
    y = np.asarray(z, dtype=float) / width
    return bump(y) / (math.e * width * _unit_mollifier_mass())


def half_max_interval(x: np.ndarray, w1: np.ndarray) -> Tuple[float, float, float]:
    """(W0, z0, z0*): the maximum, its position and where w1 first drops to W0/2 to the right."""
    peak = int(np.argmax(w1))
    W0 = float(w1[peak])
    below = np.nonzero(w1[peak:] <= 0.5 * W0)[0]
    if len(below) == 0:
        return W0, float(x[peak]), float(x[-1])
    j = peak + int(below[0])
    # linear interpolation of the crossing
    x0, x1, y0, y1 = x[j - 1], x[j], w1[j - 1], w1[j]
    z_star = x0 + (0.5 * W0 - y0) * (x1 - x0) / (y1 - y0) if y1 != y0 else x1
    return W0, float(x[peak]), float(z_star)


def _non_leading_amplitudes(regime: Regime, spec: InitialDataSpec, W0: float) -> list[float]:
    """C eta W0 for the entropy family, C eta W0^2 for the others."""
    entropy_family = 4
    return [
        spec.C * spec.eta * (W0 if family == entropy_family else W0**2)
        for family in range(2, regime.family_count + 1)
    ]


def _scaled_bump(amplitude: float, eta: float):
    def profile(x: np.ndarray) -> np.ndarray:
        return amplitude * bump(np.asarray(x) / (2.0 * eta))

    return profile


def gen_shock_data(spec: InitialDataSpec, p: PhysParams, regime: Optional[Regime] = None) -> InitialData:
    """
    Smooth compact profiles with the leading family-1 amplitude W0 = theta at z0 = 0.

    All families share the bump shape on [-2 eta, 2 eta]; the entropy family is one
    power of W0 larger than the other non-leading families.
    """
    regime = regime or Regime.for_params(p)
    support = (-2.0 * spec.eta, 2.0 * spec.eta)
    W0 = spec.theta
    amplitudes = [W0] + _non_leading_amplitudes(regime, spec, W0)
    profiles = ProfileSet(tuple(_scaled_bump(a, spec.eta) for a in amplitudes), support)
    field = integrate_profile(profiles, p, regime)
    x = np.linspace(*support, spec.profile_points)
    _, z0, z0_star = half_max_interval(x, profiles(x)[:, 0])
    logger.info(
        "Shock-family data generated",
        extra={"regime": regime.value, "W0": W0, "eta": spec.eta, "sup_phi": field.sup_norm},
    )
    return InitialData(spec=spec, regime=regime, profiles=profiles, field=field, W0=W0, z0=z0, z0_star=z0_star)


def window_integrals(
    z: np.ndarray, eta: float, alpha: float, points: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Log-weighted and plain mollified window integrals at every z.

    Returns (int zeta(y) |ln(z-y)|^alpha chi(z-y) dy, int zeta(y) chi(z-y) dy) with
    chi the indicator of [6 eta/5, 9 eta/5], by composite Simpson over the exact
    overlap of the mollifier support and the shifted window.
    """
    if len(z) > WINDOW_CHUNK:
        parts = [window_integrals(z[k : k + WINDOW_CHUNK], eta, alpha, points) for k in range(0, len(z), WINDOW_CHUNK)]
        return np.concatenate([a for a, _ in parts]), np.concatenate([b for _, b in parts])
    width = eta / 10.0
    lo = np.maximum(-width, z - 1.8 * eta)
    hi = np.minimum(width, z - 1.2 * eta)
    span = np.clip(hi - lo, 0.0, None)
    s = np.linspace(0.0, 1.0, points + 1)
    y = lo[:, None] + span[:, None] * s[None, :]
    kernel = mollifier(y, width)
    log_term = np.abs(np.log(np.clip(z[:, None] - y, 1e-300, None))) ** alpha
    mass = scipy.integrate.simpson(kernel, x=s, axis=1) * span
    logged = scipy.integrate.simpson(kernel * log_term, x=s, axis=1) * span
    return logged, mass


def _checked_window_integrals(z: np.ndarray, spec: InitialDataSpec) -> Tuple[np.ndarray, np.ndarray]:
    fine = window_integrals(z, spec.eta, spec.alpha, spec.quad_points)
    coarse = window_integrals(z, spec.eta, spec.alpha, spec.quad_points // 2)
    disagreement = max(float(np.max(np.abs(f - c))) for f, c in zip(fine, coarse))
    if disagreement > QUADRATURE_TOLERANCE:
        raise QuadratureError(disagreement=disagreement, tolerance=QUADRATURE_TOLERANCE)
    return fine


def _spline_profile(z: np.ndarray, values: np.ndarray):
    spline = scipy.interpolate.CubicSpline(z, values, extrapolate=False)

    def profile(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.nan_to_num(spline(x), nan=0.0)

    return profile


def gen_illposedness_data(spec: InitialDataSpec, p: PhysParams, regime: Optional[Regime] = None) -> InitialData:
    """
    w1 = theta * (mollified |ln|^alpha window), w_k = theta^2 * (mollified window) for k >= 2.

    The profiles live on [11 eta/10, 19 eta/10] and are integrated from -2 eta.
    """
    regime = regime or Regime.for_params(p)
    eta = spec.eta
    z = np.linspace(1.1 * eta, 1.9 * eta, spec.profile_points)
    logged, mass = _checked_window_integrals(z, spec)
    w1 = spec.theta * logged
    rest = spec.theta**2 * mass
    functions = (_spline_profile(z, w1),) + tuple(
        _spline_profile(z, rest) for _ in range(regime.family_count - 1)
    )
    profiles = ProfileSet(functions, (-2.0 * eta, 2.0 * eta))
    field = integrate_profile(profiles, p, regime)
    W0, z0, z0_star = half_max_interval(z, w1)
    logger.info(
        "Ill-posedness data generated",
        extra={"regime": regime.value, "W0": W0, "eta": eta, "z0": z0},
    )
    return InitialData(spec=spec, regime=regime, profiles=profiles, field=field, W0=W0, z0=z0, z0_star=z0_star)


def generate(spec: InitialDataSpec, p: PhysParams, regime: Optional[Regime] = None) -> InitialData:
    if spec.kind is InitialDataKind.ILLPOSEDNESS:
        return gen_illposedness_data(spec, p, regime)
    return gen_shock_data(spec, p, regime)


class H1Scaling(msgspec.Struct):
    norm: float
    scaling: float
    K: float


def h1_norm_scaling(spec: InitialDataSpec, data: Optional[InitialData] = None, points: int = 4097) -> H1Scaling:
    """
    H^1 norm of w1 extended constantly across the ball of radius eta/2 over [eta, 2 eta].

    The cross-section area of that ball is pi (x - eta)(2 eta - x). The reference
    scaling is theta sqrt(eta) (1 + |ln(6 eta/5)|^alpha + |ln(9 eta/5)|^alpha); K is their ratio.
    """
    eta = spec.eta
    x = np.linspace(eta, 2.0 * eta, points)
    if data is None:
        logged, _ = _checked_window_integrals(x, spec)
        w1 = spec.theta * logged
    else:
        w1 = data.profiles(x)[:, 0]
    dw1 = np.gradient(w1, x)
    area = np.pi * (x - eta) * (2.0 * eta - x)
    norm = math.sqrt(float(scipy.integrate.simpson((w1**2 + dw1**2) * area, x=x)))
    scaling = spec.theta * math.sqrt(eta) * (
        1.0 + abs(math.log(1.2 * eta)) ** spec.alpha + abs(math.log(1.8 * eta)) ** spec.alpha
    )
    return H1Scaling(norm=norm, scaling=scaling, K=norm / scaling)
