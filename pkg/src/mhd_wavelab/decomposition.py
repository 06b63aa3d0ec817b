"""Wave decomposition of gradients and the profile ODE that rebuilds a field from amplitudes."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core.exceptions import BallExitError, DomainError
from .eigensystem import EigenSystem, Normalization, Regime, basis_normalization, eigen_batch
from .state import STATE_SIZE, PhysParams, State

logger = logging.getLogger(__name__)

RK4_STEPS_PER_SUPPORT = 2048

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class WaveAmplitudes:
    w: np.ndarray
    state: State


def _regime_vector(vec: np.ndarray, es: EigenSystem) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    if vec.shape[-1] == es.size:
        return vec
    return es.regime.restrict(vec)


def decompose(grad_phi: np.ndarray, es: EigenSystem, state: Optional[State] = None) -> WaveAmplitudes:
    """w_i = l_i . grad_phi; 7-vectors are restricted to the regime's unknowns first."""
    w = es.left @ _regime_vector(grad_phi, es)
    return WaveAmplitudes(w=w, state=state if state is not None else State.zero())


def reconstruct(w: WaveAmplitudes | np.ndarray, es: EigenSystem) -> np.ndarray:
    """grad_phi = sum_k w_k r_k, returned in the regime's coordinates."""
    amplitudes = w.w if isinstance(w, WaveAmplitudes) else np.asarray(w, dtype=float)
    return es.right @ amplitudes


@dataclass(frozen=True)
class ProfileSet:
    """Per-family amplitude profiles w_k(x) with a common compact support."""

    functions: tuple[Profile, ...]
    support: tuple[float, float]

    @property
    def family_count(self) -> int:
        return len(self.functions)

    @property
    def width(self) -> float:
        return self.support[1] - self.support[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.stack([np.asarray(fn(x), dtype=float) * np.ones_like(x) for fn in self.functions], axis=-1)

    @classmethod
    def zero(cls, family_count: int, support: tuple[float, float]) -> "ProfileSet":
        return cls(tuple(_zero_profile for _ in range(family_count)), support)


def _zero_profile(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(x)


@dataclass(frozen=True)
class ProfileField:
    """Phi_0 on the integration grid; zero left of the support, constant right of it."""

    x: np.ndarray
    phi: np.ndarray
    w: np.ndarray
    regime: Regime
    normalization: Normalization = Normalization.COEFFICIENT
    meta: dict = field(default_factory=dict)

    def sample(self, x: np.ndarray) -> np.ndarray:
        """Linear interpolation with constant extension, shape (len(x), 7)."""
        x = np.asarray(x, dtype=float)
        return np.stack([np.interp(x, self.x, self.phi[:, j]) for j in range(STATE_SIZE)], axis=-1)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.phi)))


def _profile_rhs(phi: np.ndarray, w: np.ndarray, p: PhysParams, regime: Regime, normalization: Normalization):
    _, right, _ = eigen_batch(phi, p, regime, normalization, check=False)
    return regime.embed(right @ w)


def integrate_profile(
    profiles: ProfileSet,
    p: PhysParams,
    regime: Regime,
    *,
    x_range: Optional[tuple[float, float]] = None,
    normalization: Optional[Normalization] = None,
    steps_per_support: int = RK4_STEPS_PER_SUPPORT,
) -> ProfileField:
    """
    Solve dPhi/dx = sum_k w_k(x) r_k(Phi) with Phi = 0 at the left end.

    Classical RK4 with a uniform step no larger than support / ``steps_per_support``.
    The ball is checked after every step.
    """
    if profiles.family_count != regime.family_count:
        raise DomainError(
            f"Expected {regime.family_count} profiles, got {profiles.family_count}",
            argument="profiles",
            value=profiles.family_count,
            module="decomposition",
        )
    normalization = normalization or basis_normalization(regime)
    lo, hi = x_range or profiles.support
    if not hi > lo:
        raise DomainError("Empty integration range", argument="x_range", value=[lo, hi], module="decomposition")
    n_steps = max(1, math.ceil((hi - lo) / (profiles.width / steps_per_support)))
    x = np.linspace(lo, hi, n_steps + 1)
    h = x[1] - x[0]

    w_nodes = profiles(x)
    w_mid = profiles(0.5 * (x[:-1] + x[1:]))
    phi = np.zeros((n_steps + 1, STATE_SIZE))
    radius = p.ball_radius

    for n in range(n_steps):
        y = phi[n]
        k1 = _profile_rhs(y, w_nodes[n], p, regime, normalization)
        k2 = _profile_rhs(y + 0.5 * h * k1, w_mid[n], p, regime, normalization)
        k3 = _profile_rhs(y + 0.5 * h * k2, w_mid[n], p, regime, normalization)
        k4 = _profile_rhs(y + h * k3, w_nodes[n + 1], p, regime, normalization)
        phi[n + 1] = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        sup = float(np.max(np.abs(phi[n + 1])))
        if not sup <= radius:
            raise BallExitError(
                "Integrated profile left the hyperbolicity ball",
                sup_norm=sup,
                radius=radius,
                module="decomposition",
            )

    logger.debug(
        "Profile integrated",
        extra={"regime": regime.value, "steps": n_steps, "sup_norm": float(np.max(np.abs(phi)))},
    )
    return ProfileField(x=x, phi=phi, w=w_nodes, regime=regime, normalization=normalization)


def profile_roundtrip_error(profile: ProfileField, p: PhysParams) -> float:
    """
    Sup over interior grid points of |l(Phi) dPhi/dx - w|.

    dPhi/dx uses fourth-order central differences on the integration grid.
    """
    x, phi = profile.x, profile.phi
    if len(x) < 5:
        raise DomainError("Need at least five grid points", argument="x", value=len(x), module="decomposition")
    h = x[1] - x[0]
    grad = (-phi[4:] + 8.0 * phi[3:-1] - 8.0 * phi[1:-3] + phi[:-4]) / (12.0 * h)
    interior = phi[2:-2]
    _, _, left = eigen_batch(interior, p, profile.regime, profile.normalization, check=False)
    w = np.einsum("nij,nj->ni", left, profile.regime.restrict(grad))
    return float(np.max(np.abs(w - profile.w[2:-2])))


def decompose_field(
    phi: np.ndarray,
    grad: np.ndarray,
    p: PhysParams,
    regime: Regime,
    normalization: Optional[Normalization] = None,
) -> np.ndarray:
    """Wave amplitudes on arrays: phi, grad of shape (N, 7) -> w of shape (N, n)."""
    normalization = normalization or basis_normalization(regime)
    _, _, left = eigen_batch(phi, p, regime, normalization, check=False)
    return np.einsum("nij,nj->ni", left, regime.restrict(grad))


def bump_profiles(amplitudes: Sequence[float], shape: Profile, support: tuple[float, float]) -> ProfileSet:
    """Each family gets ``amplitude * shape``."""
    return ProfileSet(tuple(_scaled(a, shape) for a in amplitudes), support)


def _scaled(amplitude: float, shape: Profile) -> Profile:
    def profile(x: np.ndarray) -> np.ndarray:
        return amplitude * shape(x)

    return profile
