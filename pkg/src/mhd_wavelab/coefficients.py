"""
Interaction coefficients of the characteristic decomposition.

For families i, k, m (1-based in the public functions):

    c^i_im   = grad(lambda_i) . r_m
    gamma^i_im = -(lambda_i - lambda_m) l_i . (grad(r_i) r_m - grad(r_m) r_i)
    gamma^i_km = -(lambda_k - lambda_m) l_i . (grad(r_k) r_m),   k, m != i

Directional derivatives of the eigenvector columns come from complex-step
differentiation of the closed-form eigenvectors, which is exact to rounding.
``fd_gamma_oracle`` recomputes the same quantities with real central differences
and serves as an independent check.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional

import msgspec
import numpy as np

from .closed_forms import CLOSED_FORM_FAMILIES, closed_form_gamma
from .core.exceptions import (
    DegenerateDirectionError,
    DomainError,
    IndexContractError,
    OracleConvergenceError,
    SingularityError,
    StencilError,
)
from .eigensystem import H_FLOOR, Normalization, Regime, eigen_analytic, eigen_batch
from .state import ENTROPY, H2, H3, RHO, PhysParams, State, speed_terms

logger = logging.getLogger(__name__)

COMPLEX_STEP = 1e-30
FD_STEP = 1e-5
RICHARDSON_TOLERANCE = 1e-5

# Absolute tolerances of the structural identities; c11 is checked for sign
IDENTITY_TOLERANCES: Dict[str, float] = {
    "c_i2": 1e-10,
    "c_i3": 1e-10,
    "c_i6": 1e-10,
    "c_linear_degenerate": 1e-10,
    "gamma2_26": 1e-9,
    "gamma2_64": 1e-8,
}


class CoefficientBatch(NamedTuple):
    lambdas: np.ndarray  # (..., n)
    c: np.ndarray  # (..., n, n), entry (i, m) = c^i_im
    gamma: np.ndarray  # (..., n, n, n), entry (i, k, m) = gamma^i_km


@dataclass(frozen=True)
class CoefficientTable:
    c: np.ndarray
    gamma: np.ndarray
    lambdas: np.ndarray
    state: State
    regime: Regime

    @property
    def bound(self) -> float:
        """Gamma(phi): the largest coefficient in absolute value."""
        return float(max(np.max(np.abs(self.c)), np.max(np.abs(self.gamma))))


def _check_family(regime: Regime, *indices: int) -> None:
    n = regime.family_count
    if any(not 1 <= idx <= n for idx in indices):
        raise IndexContractError(
            f"Family indices must lie in 1..{n}",
            indices=indices,
            family_count=n,
        )


def _check_gamma_indices(regime: Regime, i: int, k: int, m: int) -> None:
    _check_family(regime, i, k, m)
    if k == m or m == i:
        raise IndexContractError(
            "gamma^i_km needs k != m and m != i",
            indices=(i, k, m),
            family_count=regime.family_count,
        )


def lambda_gradients(phi: np.ndarray, p: PhysParams, regime: Regime) -> np.ndarray:
    """
    Analytic gradients of all eigenvalues.

    Returns an array (..., n, n) whose row i is grad(lambda_i) in the regime's
    coordinates. The gradients never have u2 or u3 components.
    """
    phi = np.asarray(phi)
    t = speed_terms(phi, p, h1=regime.longitudinal_field(p), magnetic=regime.magnetic)
    n = regime.dimension
    shape = phi.shape[:-1] + (n,)
    rho_slot = regime.components.index(RHO)
    entropy_slot = regime.components.index(ENTROPY)

    unit = np.zeros(shape)
    unit[..., 0] = 1.0

    if regime is Regime.EULER:
        dc = np.zeros(shape)
        dc[..., rho_slot] = (p.gamma - 1.0) * t.c / (2.0 * t.rho)
        dc[..., entropy_slot] = t.c / 2.0
        return np.stack([unit + dc, unit, unit, unit, unit - dc], axis=-2)

    rho = t.rho
    da = np.zeros(shape)
    dd = np.zeros(shape)
    dq = np.zeros(shape)
    da[..., RHO] = -t.a / rho
    dd[..., RHO] = -t.d / rho
    dd[..., H2] = 2.0 * p.mu0 * phi[..., H2] / rho
    dd[..., H3] = 2.0 * p.mu0 * phi[..., H3] / rho
    dq[..., RHO] = (p.gamma - 1.0) * t.q / rho
    dq[..., ENTROPY] = t.q

    # implicit differentiation of f^2 - T f + P = 0 and s = T - f
    dT = da + dd + dq
    dP = t.q[..., None] * da + t.a[..., None] * dq
    gap = (t.f - t.s)[..., None]
    df = (t.f[..., None] * dT - dP) / gap
    dcf = df / (2.0 * t.cf[..., None])

    if regime is Regime.H1ZERO:
        return np.stack([unit + dcf, unit, unit, unit, unit, unit, unit - dcf], axis=-2)

    ds = (dP - t.s[..., None] * dT) / gap
    dcs = ds / (2.0 * t.cs[..., None])
    dca = np.zeros(shape)
    dca[..., RHO] = -t.ca / (2.0 * rho)
    return np.stack(
        [unit + dcf, unit + dca, unit + dcs, unit, unit - dcs, unit - dca, unit - dcf],
        axis=-2,
    )


def _require_floor(phi: np.ndarray, regime: Regime, h_floor: float) -> None:
    if regime is not Regime.MHD or h_floor <= 0:
        return
    hp2 = phi[..., H2] ** 2 + phi[..., H3] ** 2
    smallest = float(np.min(hp2))
    if smallest < h_floor:
        raise DegenerateDirectionError(h_perp_sq=smallest, h_floor=h_floor)


def grad_lambda(
    i: int,
    state: State,
    p: PhysParams,
    regime: Optional[Regime] = None,
    *,
    h_floor: float = H_FLOOR,
) -> np.ndarray:
    regime = regime or Regime.for_params(p)
    _check_family(regime, i)
    state.validate()
    _require_floor(state.phi, regime, h_floor)
    return lambda_gradients(state.phi, p, regime)[i - 1]


def eigenvector_derivatives(
    phi: np.ndarray,
    p: PhysParams,
    regime: Regime,
    right: np.ndarray,
    step: float = COMPLEX_STEP,
) -> np.ndarray:
    """
    Directional derivatives of every right eigenvector along every right eigenvector.

    Returns D with D[..., m, :, k] = grad(r_k) . r_m, evaluated by complex step.
    """
    directions = regime.embed(np.swapaxes(right, -1, -2))
    shifted = phi[..., None, :] + 1j * step * directions
    _, shifted_right, _ = eigen_batch(shifted, p, regime, Normalization.COEFFICIENT, check=False)
    return shifted_right.imag / step


def _assemble_gamma(lambdas: np.ndarray, contracted: np.ndarray) -> np.ndarray:
    """Build gamma^i_km from T[i, k, m] = l_i . (grad(r_k) r_m)."""
    n = lambdas.shape[-1]
    diff = lambdas[..., :, None] - lambdas[..., None, :]
    gamma = -diff[..., None, :, :] * contracted
    for i in range(n):
        own = contracted[..., i, i, :] - contracted[..., i, :, i]
        gamma[..., i, i, :] = -diff[..., i, :] * own
        gamma[..., i, :, i] = 0.0
    return gamma


def coefficient_tables(
    phi: np.ndarray,
    p: PhysParams,
    regime: Regime,
    *,
    h_floor: float = H_FLOOR,
) -> CoefficientBatch:
    """All c and gamma coefficients on an array of states (coefficient normalization)."""
    phi = np.asarray(phi, dtype=float)
    lambdas, right, left = eigen_batch(phi, p, regime, Normalization.COEFFICIENT, h_floor=h_floor)
    grads = lambda_gradients(phi, p, regime)
    c = grads @ right
    derivs = eigenvector_derivatives(phi, p, regime, right)
    # T[i, k, m] = l_i . D_m[:, k]
    contracted = np.einsum("...ij,...mjk->...ikm", left, derivs)
    return CoefficientBatch(lambdas=lambdas, c=c, gamma=_assemble_gamma(lambdas, contracted))


def coefficient_table(
    state: State,
    p: PhysParams,
    regime: Optional[Regime] = None,
    *,
    h_floor: float = H_FLOOR,
) -> CoefficientTable:
    regime = regime or Regime.for_params(p)
    state.validate()
    batch = coefficient_tables(state.phi, p, regime, h_floor=h_floor)
    return CoefficientTable(
        c=batch.c,
        gamma=batch.gamma,
        lambdas=batch.lambdas,
        state=state,
        regime=regime,
    )


def coefficient_c(
    i: int,
    m: int,
    state: State,
    p: PhysParams,
    regime: Optional[Regime] = None,
    *,
    h_floor: float = H_FLOOR,
) -> float:
    regime = regime or Regime.for_params(p)
    _check_family(regime, i, m)
    state.validate()
    es = eigen_analytic(state, p, regime, Normalization.COEFFICIENT, h_floor=h_floor)
    return float(grad_lambda(i, state, p, regime, h_floor=h_floor) @ es.r(m))


def coefficient_gamma(
    i: int,
    k: int,
    m: int,
    state: State,
    p: PhysParams,
    regime: Optional[Regime] = None,
    *,
    h_floor: float = H_FLOOR,
) -> float:
    """
    gamma^i_km at one state.

    Families 2, 4 and 6 of the mhd regime use their closed forms, which need no
    degenerate-direction floor; every other coefficient comes from the complex-step table.
    """
    regime = regime or Regime.for_params(p)
    _check_gamma_indices(regime, i, k, m)
    if regime is Regime.MHD and i in CLOSED_FORM_FAMILIES:
        return closed_form_gamma(i, k, m, state, p)
    table = coefficient_table(state, p, regime, h_floor=h_floor)
    return float(table.gamma[i - 1, k - 1, m - 1])


def fast_self_interaction(state: State, p: PhysParams, regime: Optional[Regime] = None) -> float:
    """
    c^1_11 at a state.

    The fast pair stays regular where the transverse field vanishes, so no
    degenerate-direction floor applies here.
    """
    regime = regime or Regime.for_params(p)
    state.validate()
    _, right, _ = eigen_batch(state.phi, p, regime, Normalization.COEFFICIENT, check=False)
    return float(lambda_gradients(state.phi, p, regime)[0] @ right[:, 0])


def _stencil_columns(
    phi: np.ndarray,
    direction: np.ndarray,
    step: float,
    p: PhysParams,
    regime: Regime,
    h_floor: float,
) -> np.ndarray:
    """Central difference of all right eigenvectors along ``direction``."""
    center_lambdas = eigen_batch(phi, p, regime, Normalization.COEFFICIENT, h_floor=h_floor).lambdas
    columns = []
    for sign in (1.0, -1.0):
        shifted = phi + sign * step * regime.embed(direction)
        if regime is Regime.MHD:
            flipped = shifted[H2] * phi[H2] + shifted[H3] * phi[H3] <= 0
            if flipped:
                raise StencilError("Stencil crosses the zero transverse field", step=step, direction=int(sign))
        try:
            lambdas, right, _ = eigen_batch(shifted, p, regime, Normalization.COEFFICIENT, h_floor=h_floor)
        except DegenerateDirectionError as exc:
            raise StencilError(
                "Stencil point is below the degenerate-direction floor",
                step=step,
                direction=int(sign),
            ) from exc
        order = np.argsort(-lambdas, kind="stable")
        center_order = np.argsort(-center_lambdas, kind="stable")
        distinct = np.abs(np.diff(center_lambdas)) > 2.0 * step * (1.0 + np.max(np.abs(center_lambdas)))
        if not np.array_equal(order, center_order) and np.any(distinct):
            raise StencilError("Eigenvalue ordering changes within the stencil", step=step, direction=int(sign))
        columns.append(right)
    return (columns[0] - columns[1]) / (2.0 * step)


def _fd_gamma(
    i: int, k: int, m: int, state: State, p: PhysParams, regime: Regime, step: float, h_floor: float
) -> float:
    es = eigen_analytic(state, p, regime, Normalization.COEFFICIENT, h_floor=h_floor)
    lam = es.lambdas
    d_along_m = _stencil_columns(state.phi, es.r(m), step, p, regime, h_floor)
    if k != i:
        return float(-(lam[k - 1] - lam[m - 1]) * es.l(i) @ d_along_m[:, k - 1])
    d_along_i = _stencil_columns(state.phi, es.r(i), step, p, regime, h_floor)
    own = es.l(i) @ d_along_m[:, i - 1] - es.l(i) @ d_along_i[:, m - 1]
    return float(-(lam[i - 1] - lam[m - 1]) * own)


def fd_gamma_oracle(
    i: int,
    k: int,
    m: int,
    state: State,
    p: PhysParams,
    h: float = FD_STEP,
    regime: Optional[Regime] = None,
    *,
    h_floor: float = H_FLOOR,
    tolerance: float = RICHARDSON_TOLERANCE,
) -> float:
    """
    gamma^i_km from real central differences at h and h/2, Richardson-combined.

    Raises OracleConvergenceError when the two estimates differ by more than
    ``tolerance`` relative to max(1, |estimate|).
    """
    regime = regime or Regime.for_params(p)
    _check_gamma_indices(regime, i, k, m)
    if not 1e-7 <= h <= 1e-3:
        raise DomainError("Finite-difference step outside [1e-7, 1e-3]", argument="h", value=h, module="coefficients")
    state.validate()
    coarse = _fd_gamma(i, k, m, state, p, regime, h, h_floor)
    fine = _fd_gamma(i, k, m, state, p, regime, h / 2.0, h_floor)
    disagreement = abs(fine - coarse) / max(1.0, abs(fine))
    if disagreement > tolerance:
        raise OracleConvergenceError(step=h, disagreement=disagreement, tolerance=tolerance)
    return (4.0 * fine - coarse) / 3.0


def sample_ball(
    p: PhysParams,
    n: int,
    seed: int,
    regime: Regime,
    *,
    radius: Optional[float] = None,
    h_floor: float = H_FLOOR,
) -> np.ndarray:
    """Fixed-seed uniform samples of the sup-norm ball, shape (n, 7)."""
    if n < 1:
        raise DomainError("Need at least one sample", argument="n_samples", value=n, module="coefficients")
    radius = p.ball_radius if radius is None else radius
    rng = np.random.default_rng(seed)
    samples = rng.uniform(-radius, radius, size=(n, 7))
    if not regime.magnetic:
        samples[:, [H2, H3]] = 0.0
    elif regime is Regime.MHD and h_floor > 0:
        low = samples[:, H2] ** 2 + samples[:, H3] ** 2 < h_floor
        while np.any(low):
            samples[low, H2] = rng.uniform(-radius, radius, size=int(np.sum(low)))
            low = samples[:, H2] ** 2 + samples[:, H3] ** 2 < h_floor
    return samples


def identity_residuals(batch: CoefficientBatch, regime: Regime, p: PhysParams) -> Dict[str, float]:
    """
    Largest violation of every structural identity that applies to the regime.

    ``c11_max`` is the largest c^1_11 seen and must stay negative; the other
    entries are absolute residuals compared against IDENTITY_TOLERANCES.
    """
    c, gamma, lam = batch.c, batch.gamma, batch.lambdas
    out: Dict[str, float] = {"c11_max": float(np.max(c[..., 0, 0]))}
    if regime is Regime.MHD:
        out["c_i2"] = float(np.max(np.abs(c[..., :, 1])))
        out["c_i6"] = float(np.max(np.abs(c[..., :, 5])))
        out["c_linear_degenerate"] = float(
            np.max(np.abs(np.stack([c[..., 1, 1], c[..., 3, 3], c[..., 5, 5]])))
        )
        out["gamma2_26"] = float(np.max(np.abs(gamma[..., 1, 1, 5])))
        expected = -(lam[..., 5] - lam[..., 3]) / (4.0 * p.gamma)
        out["gamma2_64"] = float(np.max(np.abs(gamma[..., 1, 5, 3] - expected)))
        return out
    middle = range(1, 6) if regime is Regime.H1ZERO else range(1, 4)
    out["c_linear_degenerate"] = float(max(np.max(np.abs(c[..., i, i])) for i in middle))
    out["c_i2"] = float(np.max(np.abs(c[..., :, 1])))
    out["c_i3"] = float(np.max(np.abs(c[..., :, 2])))
    return out


def failed_identities(residuals: Dict[str, float]) -> List[str]:
    failed = [name for name, tol in IDENTITY_TOLERANCES.items() if name in residuals and residuals[name] > tol]
    if residuals.get("c11_max", -1.0) >= 0:
        failed.append("c11_max")
    return failed


class SweepReport(msgspec.Struct, kw_only=True):
    regime: str
    samples: int
    gamma_max: float
    argmax_sample: int
    argmax_indices: List[int]
    argmax_state: List[float]
    identity_residuals: Dict[str, float]
    failed: List[str]


def _chunk_bounds(n: int, chunk: int) -> List[tuple[int, int]]:
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def boundedness_sweep(
    p: PhysParams,
    n_samples: int,
    *,
    seed: int = 0,
    regime: Optional[Regime] = None,
    threads: int = 1,
    chunk: int = 512,
    h_floor: float = H_FLOOR,
) -> SweepReport:
    """
    Evaluate every coefficient on a fixed-seed sample of the ball.

    Chunks are reduced in input order, so the report does not depend on ``threads``.
    """
    regime = regime or Regime.for_params(p)
    samples = sample_ball(p, n_samples, seed, regime, h_floor=h_floor)
    bounds = _chunk_bounds(n_samples, chunk)

    def evaluate(lo_hi: tuple[int, int]) -> CoefficientBatch:
        lo, hi = lo_hi
        return coefficient_tables(samples[lo:hi], p, regime, h_floor=h_floor)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        batches = list(pool.map(evaluate, bounds))

    gamma_max = -1.0
    argmax_sample = 0
    argmax_indices: List[int] = []
    residuals: Dict[str, float] = {}
    for (lo, _), batch in zip(bounds, batches):
        magnitudes = np.concatenate(
            [np.abs(batch.c).reshape(len(batch.c), -1), np.abs(batch.gamma).reshape(len(batch.gamma), -1)],
            axis=1,
        )
        finite = np.all(np.isfinite(magnitudes), axis=1)
        if not np.all(finite):
            bad = int(np.argmin(finite))
            raise SingularityError(sample=lo + bad, state=samples[lo + bad])
        flat = int(np.argmax(magnitudes))
        row, col = divmod(flat, magnitudes.shape[1])
        if magnitudes[row, col] > gamma_max:
            gamma_max = float(magnitudes[row, col])
            argmax_sample = lo + row
            argmax_indices = _unflatten_coefficient(col, regime.family_count)
        for name, value in identity_residuals(batch, regime, p).items():
            residuals[name] = max(residuals.get(name, -np.inf), value)

    report = SweepReport(
        regime=regime.value,
        samples=n_samples,
        gamma_max=gamma_max,
        argmax_sample=argmax_sample,
        argmax_indices=argmax_indices,
        argmax_state=[float(v) for v in samples[argmax_sample]],
        identity_residuals=residuals,
        failed=failed_identities(residuals),
    )
    logger.info(
        "Boundedness sweep finished",
        extra={"regime": regime.value, "samples": n_samples, "gamma_max": gamma_max},
    )
    return report


def _unflatten_coefficient(col: int, n: int) -> List[int]:
    """1-based (i, m) for a c entry or (i, k, m) for a gamma entry."""
    if col < n * n:
        i, m = divmod(col, n)
        return [i + 1, m + 1]
    col -= n * n
    i, rest = divmod(col, n * n)
    k, m = divmod(rest, n)
    return [i + 1, k + 1, m + 1]


class CancellationLevel(msgspec.Struct):
    k: int
    h_perp: float
    coefficient_max: float


def cancellation_sweep(
    p: PhysParams,
    k_max: int = 20,
    *,
    base: float = 1e-3,
    seed: int = 0,
    samples: int = 16,
) -> List[CancellationLevel]:
    """
    Largest |coefficient| along H_perp = base * 2^-k with the degenerate floor disabled.

    Bounded values as k grows are the numerical form of the cancellations that keep
    the coefficients regular near the non-strictly hyperbolic locus.
    """
    regime = Regime.MHD
    anchors = sample_ball(p, samples, seed, regime, radius=p.delta, h_floor=0.0)
    angles = np.random.default_rng(seed + 1).uniform(0.0, 2.0 * np.pi, size=samples)
    levels: List[CancellationLevel] = []
    for k in range(k_max + 1):
        h_perp = base * 2.0**-k
        phi = anchors.copy()
        phi[:, H2] = h_perp * np.cos(angles)
        phi[:, H3] = h_perp * np.sin(angles)
        batch = coefficient_tables(phi, p, regime, h_floor=0.0)
        peak = float(max(np.max(np.abs(batch.c)), np.max(np.abs(batch.gamma))))
        if not np.isfinite(peak):
            finite = np.isfinite(batch.gamma).reshape(samples, -1).all(axis=1)
            worst = int(np.argmin(finite))
            raise SingularityError(sample=worst, state=phi[worst])
        levels.append(CancellationLevel(k=k, h_perp=h_perp, coefficient_max=peak))
    return levels
