"""
Coefficient matrix of the planar system and its eigenstructure.

Three regimes are supported: the full system with H1 > 0, the H1 = 0 system whose
five middle families share the speed u1, and the compressible Euler system on the
sub-vector (u1, u2, u3, rho - 1, S). Everything is written on arrays of states so
the solver and the sweeps can call it once per grid or sample set; complex input is
accepted so that eigenvector derivatives can be taken by complex step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Dict, List, NamedTuple

import numpy as np
import scipy.linalg

from .core.exceptions import DegenerateDirectionError, OracleError, ParamsError
from .state import ENTROPY, H2, H3, RHO, STATE_SIZE, U1, PhysParams, State, speed_terms

logger = logging.getLogger(__name__)

H_FLOOR = 1e-12


class Regime(StrEnum):
    MHD = "mhd"
    H1ZERO = "h1zero"
    EULER = "euler"

    @property
    def dimension(self) -> int:
        return 5 if self is Regime.EULER else STATE_SIZE

    @property
    def family_count(self) -> int:
        return self.dimension

    @property
    def components(self) -> tuple[int, ...]:
        """Positions of the regime's unknowns inside the 7-vector."""
        if self is Regime.EULER:
            return (U1, 1, 2, RHO, ENTROPY)
        return tuple(range(STATE_SIZE))

    @property
    def magnetic(self) -> bool:
        return self is not Regime.EULER

    def restrict(self, phi: np.ndarray) -> np.ndarray:
        return np.asarray(phi)[..., list(self.components)]

    def embed(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec)
        if self is not Regime.EULER:
            return vec
        out = np.zeros(vec.shape[:-1] + (STATE_SIZE,), dtype=vec.dtype)
        out[..., list(self.components)] = vec
        return out

    def longitudinal_field(self, p: PhysParams) -> float:
        if self is Regime.MHD:
            if p.H1 <= 0:
                raise ParamsError(
                    "The mhd regime needs a positive longitudinal field",
                    field="H1",
                    value=p.H1,
                    bound="> 0",
                )
            return p.H1
        return 0.0

    @classmethod
    def for_params(cls, p: PhysParams) -> "Regime":
        return cls.MHD if p.H1 > 0 else cls.H1ZERO


class Normalization(StrEnum):
    """Eigenvector scaling: the coefficient-work basis or the one regular at H_perp = 0."""

    COEFFICIENT = "coefficient"
    UNIT = "unit"


def basis_normalization(regime: Regime) -> Normalization:
    """Basis used by the solver and the profile integrator."""
    return Normalization.UNIT if regime is Regime.MHD else Normalization.COEFFICIENT


@dataclass(frozen=True)
class SystemMatrix:
    a: np.ndarray
    regime: Regime

    @property
    def size(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (descending), right eigenvectors as columns, left eigenvectors as rows."""

    lambdas: np.ndarray
    right: np.ndarray
    left: np.ndarray
    regime: Regime
    normalization: Normalization = Normalization.COEFFICIENT

    @property
    def size(self) -> int:
        return self.lambdas.shape[0]

    def r(self, i: int) -> np.ndarray:
        """Right eigenvector of family i (1-based)."""
        return self.right[:, i - 1]

    def l(self, i: int) -> np.ndarray:  # noqa: E743
        """Left eigenvector of family i (1-based)."""
        return self.left[i - 1, :]


class EigenBatch(NamedTuple):
    lambdas: np.ndarray
    right: np.ndarray
    left: np.ndarray


def build_matrix(state: State, p: PhysParams, regime: Regime) -> SystemMatrix:
    """A(phi) such that d_t phi + A(phi) d_x phi = 0."""
    state.validate()
    phi = state.phi
    t = speed_terms(phi, p, h1=regime.longitudinal_field(p), magnetic=regime.magnetic)
    rho, q, dsp = float(t.rho), float(t.q), float(t.p)
    u1 = phi[U1]

    if regime is Regime.EULER:
        m = u1 * np.eye(5)
        m[0, 3] = q / rho
        m[0, 4] = dsp / rho
        m[3, 0] = rho
        return SystemMatrix(a=m, regime=regime)

    h1 = regime.longitudinal_field(p)
    h2, h3 = phi[H2], phi[H3]
    m = u1 * np.eye(STATE_SIZE)
    m[0, 3] = q / rho
    m[0, 4] = p.mu0 * h2 / rho
    m[0, 5] = p.mu0 * h3 / rho
    m[0, 6] = dsp / rho
    m[1, 4] = -p.mu0 * h1 / rho
    m[2, 5] = -p.mu0 * h1 / rho
    m[3, 0] = rho
    m[4, 0] = h2
    m[4, 1] = -h1
    m[5, 0] = h3
    m[5, 2] = -h1
    return SystemMatrix(a=m, regime=regime)


def eigen_batch(
    phi: np.ndarray,
    p: PhysParams,
    regime: Regime,
    normalization: Normalization = Normalization.COEFFICIENT,
    *,
    h_floor: float = H_FLOOR,
    check: bool = True,
) -> EigenBatch:
    """
    Analytic eigenstructure on an array of states.

    Args:
        phi: states, trailing axis of length 7; complex input is differentiated by complex step
        p: physical parameters
        regime: which system to decompose
        normalization: eigenvector scaling (only the mhd regime distinguishes the two)
        h_floor: smallest H_perp^2 accepted by the coefficient basis of the mhd regime
        check: validate states and the degenerate-direction floor

    Returns:
        EigenBatch with shapes (..., n), (..., n, n), (..., n, n)
    """
    phi = np.asarray(phi)
    h1 = regime.longitudinal_field(p)
    t = speed_terms(phi, p, h1=h1, magnetic=regime.magnetic, check=check)
    if regime is Regime.EULER:
        return _euler_vectors(phi, t, p)
    if regime is Regime.H1ZERO:
        return _h1zero_vectors(phi, t, p)
    if normalization is Normalization.UNIT:
        return _mhd_unit_vectors(phi, t, p, h1)
    if check:
        hp2 = np.real(phi[..., H2] ** 2 + phi[..., H3] ** 2)
        smallest = float(np.min(hp2)) if np.size(hp2) else np.inf
        if smallest < h_floor:
            raise DegenerateDirectionError(h_perp_sq=smallest, h_floor=h_floor)
    return _mhd_coefficient_vectors(phi, t, p, h1)


def _empty(phi: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    dtype = np.result_type(phi.dtype, float)
    shape = phi.shape[:-1] + (n, n)
    return np.zeros(shape, dtype=dtype), np.zeros(shape, dtype=dtype)


def _euler_vectors(phi: np.ndarray, t: Any, p: PhysParams) -> EigenBatch:
    u1 = phi[..., U1]
    rho, c, q, dsp = t.rho, t.c, t.q, t.p
    lam = np.stack([u1 + c, u1 + 0 * c, u1 + 0 * c, u1 + 0 * c, u1 - c], axis=-1)
    right, left = _empty(phi, 5)
    # columns: fast pair, two shear waves, entropy wave
    right[..., 0, 0] = -c
    right[..., 3, 0] = -rho
    right[..., 1, 1] = 1.0
    right[..., 2, 2] = 1.0
    right[..., 3, 3] = -dsp / q
    right[..., 4, 3] = 1.0
    right[..., 0, 4] = -c
    right[..., 3, 4] = rho

    left[..., 0, 0] = -1.0 / (2.0 * c)
    left[..., 0, 3] = -1.0 / (2.0 * rho)
    left[..., 0, 4] = -dsp / (2.0 * rho * q)
    left[..., 1, 1] = 1.0
    left[..., 2, 2] = 1.0
    left[..., 3, 4] = 1.0
    left[..., 4, 0] = -1.0 / (2.0 * c)
    left[..., 4, 3] = 1.0 / (2.0 * rho)
    left[..., 4, 4] = dsp / (2.0 * rho * q)
    return EigenBatch(lam, right, left)


def _h1zero_vectors(phi: np.ndarray, t: Any, p: PhysParams) -> EigenBatch:
    u1, h2, h3 = phi[..., U1], phi[..., H2], phi[..., H3]
    rho, q, dsp, f, cf = t.rho, t.q, t.p, t.f, t.cf
    mu0 = p.mu0
    still = u1 + 0 * cf
    lam = np.stack([u1 + cf, still, still, still, still, still, u1 - cf], axis=-1)
    right, left = _empty(phi, STATE_SIZE)

    for col, sign in ((0, -1.0), (6, 1.0)):
        right[..., 0, col] = -cf
        right[..., 3, col] = sign * rho
        right[..., 4, col] = sign * h2
        right[..., 5, col] = sign * h3
    right[..., 1, 1] = 1.0
    right[..., 2, 2] = 1.0
    right[..., 3, 3] = -dsp / q
    right[..., 6, 3] = 1.0
    right[..., 3, 4] = -mu0 * h2 / q
    right[..., 4, 4] = 1.0
    right[..., 3, 5] = -mu0 * h3 / q
    right[..., 5, 5] = 1.0

    scale = rho * f
    for row, sign in ((0, -1.0), (6, 1.0)):
        left[..., row, 0] = -1.0 / (2.0 * cf)
        left[..., row, 3] = sign * q / (2.0 * scale)
        left[..., row, 4] = sign * mu0 * h2 / (2.0 * scale)
        left[..., row, 5] = sign * mu0 * h3 / (2.0 * scale)
        left[..., row, 6] = sign * dsp / (2.0 * scale)
    left[..., 1, 1] = 1.0
    left[..., 2, 2] = 1.0
    left[..., 3, 6] = 1.0
    left[..., 4, 3] = -q * h2 / scale
    left[..., 4, 4] = (mu0 * h3**2 + rho * q) / scale
    left[..., 4, 5] = -mu0 * h2 * h3 / scale
    left[..., 4, 6] = -h2 * dsp / scale
    left[..., 5, 3] = -q * h3 / scale
    left[..., 5, 4] = -mu0 * h2 * h3 / scale
    left[..., 5, 5] = (mu0 * h2**2 + rho * q) / scale
    left[..., 5, 6] = -h3 * dsp / scale
    return EigenBatch(lam, right, left)


def _mhd_common(phi: np.ndarray, t: Any, p: PhysParams, h1: float):
    u1 = phi[..., U1]
    lam = np.stack(
        [u1 + t.cf, u1 + t.ca, u1 + t.cs, u1 + 0 * t.cf, u1 - t.cs, u1 - t.ca, u1 - t.cf],
        axis=-1,
    )
    right, left = _empty(phi, STATE_SIZE)
    h2, h3 = phi[..., H2], phi[..., H3]
    rho, a, f, s, q, cf, c = t.rho, t.a, t.f, t.s, t.q, t.cf, t.c
    gap = f - s

    # fast pair: r7 mirrors r1 in the density and field slots
    beta = p.mu0 * h1 / (rho * cf)
    for col, sign in ((0, 1.0), (6, -1.0)):
        right[..., 0, col] = (a - f) / cf
        right[..., 1, col] = beta * h2
        right[..., 2, col] = beta * h3
        right[..., 3, col] = sign * rho * (a - f) / f
        right[..., 4, col] = -sign * h2
        right[..., 5, col] = -sign * h3

    fast = p.mu0 * q / (2.0 * rho * (q - s) * gap)
    for row, sign in ((0, 1.0), (6, -1.0)):
        left[..., row, 0] = -cf / (2.0 * gap)
        left[..., row, 1] = h1 * h2 * cf * fast / f
        left[..., row, 2] = h1 * h3 * cf * fast / f
        left[..., row, 3] = -sign * q / (2.0 * rho * gap)
        left[..., row, 4] = -sign * h2 * fast
        left[..., row, 5] = -sign * h3 * fast
        left[..., row, 6] = -sign * q / (2.0 * p.gamma * gap)

    # entropy wave
    right[..., 3, 3] = -rho / p.gamma
    right[..., 6, 3] = 1.0
    left[..., 3, 6] = 1.0
    return lam, right, left, gap


def _mhd_coefficient_vectors(phi: np.ndarray, t: Any, p: PhysParams, h1: float) -> EigenBatch:
    lam, right, left, gap = _mhd_common(phi, t, p, h1)
    h2, h3 = phi[..., H2], phi[..., H3]
    rho, a, d, f, s, q, k, cf, cs, c = t.rho, t.a, t.d, t.f, t.s, t.q, t.k, t.cf, t.cs, t.c
    hp2 = h2**2 + h3**2
    kinv = 1.0 / k

    # Alfven pair
    for col, sign in ((1, 1.0), (5, -1.0)):
        right[..., 1, col] = k * h3
        right[..., 2, col] = -k * h2
        right[..., 4, col] = -sign * h3
        right[..., 5, col] = sign * h2
        left[..., col, 1] = kinv * h3 / (2.0 * hp2)
        left[..., col, 2] = -kinv * h2 / (2.0 * hp2)
        left[..., col, 4] = -sign * h3 / (2.0 * hp2)
        left[..., col, 5] = sign * h2 / (2.0 * hp2)

    # slow pair
    tang = (f - a) * c * kinv / (2.0 * hp2 * cf * gap)
    press = (q / f) * (f - a) / (2.0 * hp2 * gap)
    for col, sign in ((2, 1.0), (4, -1.0)):
        right[..., 0, col] = d * cs / (q - s)
        right[..., 1, col] = k * h2 * cf / c
        right[..., 2, col] = k * h3 * cf / c
        right[..., 3, col] = sign * rho * d / (q - s)
        right[..., 4, col] = -sign * h2
        right[..., 5, col] = -sign * h3
        left[..., col, 0] = cs / (2.0 * gap)
        left[..., col, 1] = h2 * tang
        left[..., col, 2] = h3 * tang
        left[..., col, 3] = sign * q / (2.0 * rho * gap)
        left[..., col, 4] = -sign * h2 * press
        left[..., col, 5] = -sign * h3 * press
        left[..., col, 6] = sign * q / (2.0 * p.gamma * gap)
    return EigenBatch(lam, right, left)


def _mhd_unit_vectors(phi: np.ndarray, t: Any, p: PhysParams, h1: float) -> EigenBatch:
    lam, right, left, gap = _mhd_common(phi, t, p, h1)
    h2, h3 = np.real(phi[..., H2]), np.real(phi[..., H3])
    rho, a, f, s, q, k, cf, cs, c = t.rho, t.a, t.f, t.s, t.q, t.k, t.cf, t.cs, t.c
    h_perp = np.hypot(h2, h3)
    # phi = 0 where the transverse direction is undefined
    zero = h_perp == 0
    safe = np.where(zero, 1.0, h_perp)
    cos = np.where(zero, 1.0, h2 / safe)
    sin = np.where(zero, 0.0, h3 / safe)
    kinv = 1.0 / k

    for col, sign in ((1, 1.0), (5, -1.0)):
        right[..., 1, col] = k * sin
        right[..., 2, col] = -k * cos
        right[..., 4, col] = -sign * sin
        right[..., 5, col] = sign * cos
        left[..., col, 1] = kinv * sin / 2.0
        left[..., col, 2] = -kinv * cos / 2.0
        left[..., col, 4] = -sign * sin / 2.0
        left[..., col, 5] = sign * cos / 2.0

    tang = (f - a) * c * kinv / (2.0 * cf * gap)
    press = (q / f) * (f - a) / (2.0 * gap)
    for col, sign in ((2, 1.0), (4, -1.0)):
        right[..., 0, col] = p.mu0 * h_perp * cs / (rho * (q - s))
        right[..., 1, col] = k * cos * cf / c
        right[..., 2, col] = k * sin * cf / c
        right[..., 3, col] = sign * p.mu0 * h_perp / (q - s)
        right[..., 4, col] = -sign * cos
        right[..., 5, col] = -sign * sin
        left[..., col, 0] = h_perp * cs / (2.0 * gap)
        left[..., col, 1] = cos * tang
        left[..., col, 2] = sin * tang
        left[..., col, 3] = sign * h_perp * q / (2.0 * rho * gap)
        left[..., col, 4] = -sign * cos * press
        left[..., col, 5] = -sign * sin * press
        left[..., col, 6] = sign * h_perp * q / (2.0 * p.gamma * gap)
    return EigenBatch(lam, right, left)


def eigen_analytic(
    state: State,
    p: PhysParams,
    regime: Regime,
    normalization: Normalization = Normalization.COEFFICIENT,
    *,
    h_floor: float = H_FLOOR,
) -> EigenSystem:
    state.validate()
    lam, right, left = eigen_batch(state.phi, p, regime, normalization, h_floor=h_floor)
    return EigenSystem(
        lambdas=np.asarray(lam, dtype=float),
        right=np.asarray(right, dtype=float),
        left=np.asarray(left, dtype=float),
        regime=regime,
        normalization=normalization,
    )


def eigen_numeric_oracle(m: SystemMatrix | np.ndarray) -> np.ndarray:
    """Eigenvalues of a matrix by a general dense routine, sorted descending."""
    a = m.a if isinstance(m, SystemMatrix) else np.asarray(m, dtype=float)
    if not np.all(np.isfinite(a)):
        raise OracleError("Matrix has non-finite entries", reason="non-finite input")
    try:
        values = scipy.linalg.eigvals(a)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise OracleError(str(exc), reason=type(exc).__name__) from exc
    if not np.all(np.isfinite(values)):
        raise OracleError("Eigenvalue routine returned non-finite values", reason="non-finite output")
    return np.sort(values.real)[::-1]


def duality_residual(es: EigenSystem) -> float:
    """max |L R - I|."""
    return float(np.max(np.abs(es.left @ es.right - np.eye(es.size))))


def eigen_residual(es: EigenSystem, m: SystemMatrix) -> float:
    """Largest of |A r_i - lambda_i r_i| and |l_i A - lambda_i l_i|, relative to 1 + |A|."""
    a = m.a
    right = np.max(np.abs(a @ es.right - es.right * es.lambdas[None, :]))
    left = np.max(np.abs(es.left @ a - es.lambdas[:, None] * es.left))
    return float(max(right, left) / (1.0 + np.max(np.sum(np.abs(a), axis=1))))


def eigen_rows(es: EigenSystem) -> List[Dict[str, Any]]:
    """One record per family: lambda, r components and l components."""
    rows: List[Dict[str, Any]] = []
    for i in range(es.size):
        row: Dict[str, Any] = {"family": i + 1, "lambda": float(es.lambdas[i])}
        row.update({f"r{j + 1}": float(es.right[j, i]) for j in range(es.size)})
        row.update({f"l{j + 1}": float(es.left[i, j]) for j in range(es.size)})
        rows.append(row)
    return rows
