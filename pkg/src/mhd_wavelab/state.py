"""Physical parameters, planar MHD state vector, equation of state and wave speeds."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import msgspec
import numpy as np

from .core.exceptions import InvalidStateError, NumericalDomainError, ParamsError

logger = logging.getLogger(__name__)

STATE_SIZE = 7
U1, U2, U3, RHO, H2, H3, ENTROPY = range(STATE_SIZE)
COMPONENT_NAMES = ("u1", "u2", "u3", "rho_minus_1", "H2", "H3", "S")

DISCRIMINANT_TOLERANCE = 1e-12
# Slack on the longitudinal field bound so that the documented default H1 = 0.1 is admissible
H1_BOUND_SLACK = 1e-9


class PhysParams(msgspec.Struct, kw_only=True, frozen=True):
    """Physical constants and experiment scales, in the units of the planar system."""

    A: float = 1.0
    gamma: float = 2.0
    mu0: float = 1.0
    H1: float = 0.1
    delta: float = 0.05
    theta: float = 0.01
    eta: float = 0.1
    alpha: float = 0.25
    epsilon: float = 0.01

    def __post_init__(self) -> None:
        for name in ("A", "mu0", "eta", "delta"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ParamsError(f"{name} must be positive", field=name, value=value, bound="> 0")
        if not self.gamma > 1:
            raise ParamsError("gamma must exceed 1", field="gamma", value=self.gamma, bound="> 1")
        if not self.H1 >= 0:
            raise ParamsError("H1 must be non-negative", field="H1", value=self.H1, bound=">= 0")
        h1_bound = min(self.A * self.gamma / self.mu0, 1.0) * 1e-2
        if self.H1**2 > h1_bound * (1 + H1_BOUND_SLACK):
            raise ParamsError(
                "Longitudinal field is not small",
                field="H1",
                value=self.H1,
                bound=f"H1^2 < {h1_bound:g} (the bound itself is admitted within relative {H1_BOUND_SLACK:g})",
            )
        if not 0 < self.alpha < 0.5:
            raise ParamsError("alpha must lie in (0, 1/2)", field="alpha", value=self.alpha, bound="(0, 1/2)")
        if not 0 < self.epsilon <= 0.01:
            raise ParamsError(
                "epsilon must lie in (0, 1/100]", field="epsilon", value=self.epsilon, bound="(0, 1/100]"
            )
        if not self.theta > 0:
            raise ParamsError("theta must be positive", field="theta", value=self.theta, bound="> 0")
        if self.theta > 0.01:
            logger.warning(
                "Data amplitude is outside the small-data regime",
                extra={"theta": self.theta, "bound": 0.01},
            )

    @property
    def ball_radius(self) -> float:
        return 2.0 * self.delta


@dataclass(frozen=True)
class State:
    """The 7-vector (u1, u2, u3, rho - 1, H2, H3, S)."""

    phi: np.ndarray

    @classmethod
    def from_components(
        cls,
        u1: float = 0.0,
        u2: float = 0.0,
        u3: float = 0.0,
        rho: float = 1.0,
        H2: float = 0.0,
        H3: float = 0.0,
        S: float = 0.0,
    ) -> "State":
        return cls(np.array([u1, u2, u3, rho - 1.0, H2, H3, S], dtype=float))

    @classmethod
    def zero(cls) -> "State":
        return cls(np.zeros(STATE_SIZE))

    @classmethod
    def of(cls, values: Sequence[float] | np.ndarray) -> "State":
        phi = np.asarray(values, dtype=float)
        if phi.shape != (STATE_SIZE,):
            raise InvalidStateError(f"State needs {STATE_SIZE} components, got shape {phi.shape}")
        return cls(phi)

    @property
    def rho(self) -> float:
        return float(self.phi[RHO] + 1.0)

    @property
    def u1(self) -> float:
        return float(self.phi[U1])

    @property
    def h_perp_sq(self) -> float:
        return float(self.phi[H2] ** 2 + self.phi[H3] ** 2)

    def ball_norm(self) -> float:
        """Sup-norm used for the hyperbolicity ball."""
        return float(np.max(np.abs(self.phi)))

    def validate(self) -> "State":
        validate_phi(self.phi)
        return self


class WaveSpeeds(NamedTuple):
    cf: float
    cs: float
    ca: float
    c: float


class SpeedTerms(NamedTuple):
    """Array-valued ingredients of the wave speeds; complex input stays complex."""

    rho: np.ndarray
    a: np.ndarray  # mu0 H1^2 / rho
    d: np.ndarray  # mu0 H_perp^2 / rho
    q: np.ndarray  # c^2
    f: np.ndarray  # Cf^2
    s: np.ndarray  # Cs^2
    c: np.ndarray
    cf: np.ndarray
    cs: np.ndarray
    ca: np.ndarray
    k: np.ndarray  # sqrt(mu0 / rho)
    p: np.ndarray  # pressure, equal to dp/dS


def validate_phi(phi: np.ndarray) -> None:
    """Reject non-finite components and non-positive density."""
    values = np.asarray(phi)
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise InvalidStateError(
            "State has non-finite components",
            component=COMPONENT_NAMES[int(bad[-1])],
        )
    rho = values[..., RHO].real + 1.0
    if np.any(rho <= 0):
        raise InvalidStateError(
            "Density must be positive",
            component="rho_minus_1",
            value=float(np.min(rho) - 1.0),
        )


def speed_terms(
    phi: np.ndarray,
    p: PhysParams,
    *,
    h1: float | None = None,
    magnetic: bool = True,
    check: bool = True,
) -> SpeedTerms:
    """
    Evaluate the EOS and the three wave speeds on an array of states.

    Args:
        phi: array with trailing axis of length 7 (real or complex)
        p: physical parameters
        h1: longitudinal field; defaults to ``p.H1``
        magnetic: False drops the transverse field (Euler)
        check: validate inputs and the discriminant

    Returns:
        SpeedTerms with arrays shaped like ``phi[..., 0]``
    """
    phi = np.asarray(phi)
    if check:
        validate_phi(phi)
    h1 = p.H1 if h1 is None else h1
    rho = phi[..., RHO] + 1.0
    entropy = phi[..., ENTROPY]
    pressure = p.A * np.exp(entropy) * rho**p.gamma
    q = p.gamma * pressure / rho
    if magnetic:
        a = p.mu0 * h1**2 / rho
        d = p.mu0 * (phi[..., H2] ** 2 + phi[..., H3] ** 2) / rho
    else:
        h1 = 0.0
        a = np.zeros_like(rho)
        d = np.zeros_like(rho)

    # (a + d + q)^2 - 4 a q written without cancellation
    disc = (q - a) ** 2 + d * (d + 2.0 * (a + q))
    if check:
        worst = float(np.min(np.real(disc))) if np.size(disc) else 0.0
        if worst < -DISCRIMINANT_TOLERANCE:
            raise NumericalDomainError(discriminant=worst)
    if np.isrealobj(disc):
        disc = np.maximum(disc, 0.0)
    f = 0.5 * (a + d + q + np.sqrt(disc))
    s = a * q / f
    k = np.sqrt(p.mu0 / rho)
    return SpeedTerms(
        rho=rho,
        a=a,
        d=d,
        q=q,
        f=f,
        s=s,
        c=np.sqrt(q),
        cf=np.sqrt(f),
        cs=np.sqrt(s),
        ca=h1 * k,
        k=k,
        p=pressure,
    )


def pressure(state: State, p: PhysParams) -> float:
    """p = A e^S rho^gamma."""
    state.validate()
    return float(p.A * np.exp(state.phi[ENTROPY]) * state.rho**p.gamma)


def entropy_derivative(state: State, p: PhysParams) -> float:
    """dp/dS, which equals the pressure for this equation of state."""
    return pressure(state, p)


def sound_speed(state: State, p: PhysParams) -> float:
    state.validate()
    return float(np.sqrt(p.A * p.gamma * np.exp(state.phi[ENTROPY]) * state.rho ** (p.gamma - 1.0)))


def wave_speeds(state: State, p: PhysParams) -> WaveSpeeds:
    """Fast, slow and Alfven speeds plus the sound speed at a state."""
    terms = speed_terms(state.phi, p)
    return WaveSpeeds(
        cf=float(terms.cf),
        cs=float(terms.cs),
        ca=float(terms.ca),
        c=float(terms.c),
    )
