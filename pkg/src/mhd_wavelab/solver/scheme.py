"""
Characteristic-upwind method of lines for d_t Phi + A(Phi) d_x Phi = 0.

At each node the one-sided second-order differences are projected on the left
eigenvectors, every amplitude is taken from its upwind side according to the
sign of lambda_k minus the frame speed, and the update is reconstructed with the
right eigenvectors. Time stepping is Heun's two-stage method.
"""

from __future__ import annotations

import logging
import math
import tempfile
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..coefficients import sample_ball
from ..core.exceptions import BallExitError, CFLViolationError, NonFiniteStateError
from ..eigensystem import Normalization, Regime, basis_normalization, eigen_batch
from ..state import RHO, PhysParams
from .field import Field, Run, SolverSettings, StopReason
from .tracing import LiveTracer, default_launches

logger = logging.getLogger(__name__)

CFL_MAX = 0.4
DOMAIN_MARGIN = 2.0


def speed_bounds(
    p: PhysParams,
    regime: Regime,
    radius: Optional[float] = None,
    *,
    samples: int = 10_000,
    seed: int = 0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Sampled per-family (min, max) of lambda_i over the ball of the given radius."""
    phi = sample_ball(p, samples, seed, regime, radius=radius)
    phi = np.vstack([phi, np.zeros((1, phi.shape[1]))])
    lam = eigen_batch(phi, p, regime, basis_normalization(regime), check=False).lambdas
    return lam.min(axis=0), lam.max(axis=0)


def default_domain(
    p: PhysParams,
    regime: Regime,
    t_max: float,
    *,
    frame_speed: float = 0.0,
    radius: Optional[float] = None,
) -> Tuple[float, float]:
    """[-2 eta - 2, 2 eta + (fastest speed relative to the frame) * t_max + 2]."""
    _, upper = speed_bounds(p, regime, radius, samples=2048)
    ahead = max(float(upper[0]) - frame_speed, 0.0)
    return -2.0 * p.eta - DOMAIN_MARGIN, 2.0 * p.eta + ahead * t_max + DOMAIN_MARGIN


class UpwindScheme:
    """Spatial operator and time step of the solver, optionally chunked over a thread pool."""

    def __init__(
        self,
        p: PhysParams,
        regime: Regime,
        *,
        normalization: Optional[Normalization] = None,
        frame_speed: float = 0.0,
        threads: int = 1,
    ) -> None:
        self.p = p
        self.regime = regime
        self.normalization = normalization or basis_normalization(regime)
        self.frame_speed = frame_speed
        self.threads = max(1, threads)
        self._pool: Optional[ThreadPoolExecutor] = (
            ThreadPoolExecutor(max_workers=self.threads) if self.threads > 1 else None
        )

    def __enter__(self) -> "UpwindScheme":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def rhs(self, phi: np.ndarray, dx: float) -> Tuple[np.ndarray, np.ndarray]:
        """d_t Phi at every node and the node eigenvalues (lab frame)."""
        n_nodes = len(phi)
        padded = np.pad(phi, ((2, 2), (0, 0)), mode="edge")
        out = np.empty_like(phi)
        lam_out = np.empty((n_nodes, self.regime.dimension))
        regime = self.regime

        def work(bounds: Tuple[int, int]) -> None:
            lo, hi = bounds
            center = padded[lo + 2 : hi + 2]
            back = (3.0 * center - 4.0 * padded[lo + 1 : hi + 1] + padded[lo:hi]) / (2.0 * dx)
            ahead = (-3.0 * center + 4.0 * padded[lo + 3 : hi + 3] - padded[lo + 4 : hi + 4]) / (2.0 * dx)
            lam, right, left = eigen_batch(center, self.p, regime, self.normalization, check=False)
            speed = lam - self.frame_speed
            w_back = np.einsum("nij,nj->ni", left, regime.restrict(back))
            w_ahead = np.einsum("nij,nj->ni", left, regime.restrict(ahead))
            w = np.where(speed > 0, w_back, w_ahead)
            out[lo:hi] = regime.embed(-np.einsum("nij,nj->ni", right, speed * w))
            lam_out[lo:hi] = lam

        chunk = math.ceil(n_nodes / self.threads)
        bounds = [(lo, min(lo + chunk, n_nodes)) for lo in range(0, n_nodes, chunk)]
        if self._pool is None:
            for b in bounds:
                work(b)
        else:
            list(self._pool.map(work, bounds))
        return out, lam_out

    def max_speed(self, lam: np.ndarray) -> float:
        return float(np.max(np.abs(lam - self.frame_speed)))

    def stable_dt(self, lam: np.ndarray, dx: float, cfl: float) -> float:
        return cfl * dx / max(self.max_speed(lam), 1e-300)

    def check_state(self, phi: np.ndarray, time: float) -> None:
        if not np.all(np.isfinite(phi)) or np.any(phi[:, RHO] <= -1.0):
            raise NonFiniteStateError("Field is no longer finite", time=time)
        sup = float(np.max(np.abs(phi)))
        if sup > self.p.ball_radius:
            raise BallExitError(
                "Field left the hyperbolicity ball",
                sup_norm=sup,
                radius=self.p.ball_radius,
                module="solver",
            )

    def advance(
        self, phi: np.ndarray, k1: np.ndarray, dt: float, dx: float, time: float
    ) -> np.ndarray:
        """Heun step from Phi^n given its right-hand side k1."""
        predictor = phi + dt * k1
        if not np.all(np.isfinite(predictor)) or np.any(predictor[:, RHO] <= -1.0):
            raise NonFiniteStateError("Predictor stage is not finite", time=time + dt)
        k2, _ = self.rhs(predictor, dx)
        new = 0.5 * (phi + predictor + dt * k2)
        self.check_state(new, time + dt)
        return new

    def step(self, field: Field, dt: float) -> Field:
        self.check_state(field.phi, field.time)
        k1, lam = self.rhs(field.phi, field.dx)
        dt_max = self.stable_dt(lam, field.dx, CFL_MAX)
        if dt > dt_max * (1.0 + 1e-12):
            raise CFLViolationError(dt=dt, dt_max=dt_max)
        return field.at(self.advance(field.phi, k1, dt, field.dx, field.time), field.time + dt)


def step_field(
    field: Field,
    p: PhysParams,
    dt: float,
    regime: Optional[Regime] = None,
    *,
    threads: int = 1,
) -> Field:
    """One Heun step of the upwind scheme."""
    regime = regime or Regime.for_params(p)
    with UpwindScheme(p, regime, frame_speed=field.frame_speed, threads=threads) as scheme:
        return scheme.step(field, dt)


class StridedSeries:
    """Keeps every ``stride``-th item of a run, plus the last one on ``force``."""

    def __init__(self, stride: int) -> None:
        self.stride = stride
        self.items: List[Any] = []
        self.last_step = -1

    def _keep(self, item: Any) -> Any:
        return item

    def offer(self, step: int, make: Callable[[], Any]) -> None:
        if step % self.stride:
            return
        self.items.append(self._keep(make()))
        self.last_step = step

    def force(self, step: int, make: Callable[[], Any]) -> None:
        if self.last_step != step:
            self.items.append(self._keep(make()))
            self.last_step = step


class SnapshotStore(StridedSeries):
    """
    Strided snapshots whose states are copied into disk-backed blocks.

    Each block is an anonymous temporary file mapped with ``numpy.memmap`` and holds
    ``block_size`` snapshots, so long runs keep every stride-th step without holding
    the whole history in memory.
    """

    def __init__(self, stride: int, block_size: int) -> None:
        super().__init__(stride)
        self.block_size = block_size
        self.blocks: List[np.memmap] = []

    def _slot(self, shape: Tuple[int, ...]) -> np.ndarray:
        index = len(self.items) % self.block_size
        if index == 0:
            with tempfile.TemporaryFile() as fh:
                self.blocks.append(np.memmap(fh, dtype=np.float64, mode="w+", shape=(self.block_size, *shape)))
        return self.blocks[-1][index]

    def _keep(self, item: Field) -> Field:
        slot = self._slot(item.phi.shape)
        slot[...] = item.phi
        return item.at(slot, item.time)


def simulate(
    field0: Field,
    p: PhysParams,
    t_max: float,
    regime: Optional[Regime] = None,
    *,
    settings: Optional[SolverSettings] = None,
    launches: Optional[Sequence[Tuple[int, float]]] = None,
    threads: int = 1,
) -> Run:
    """
    Evolve ``field0`` until a family-1 trace reaches ``rho_floor`` or ``t_max`` is reached.

    Traces launched at ``launches`` (family, lab position) advance with the field;
    by default every family gets launches over [-2 eta, 2 eta] plus a denser family-1 fan.
    """
    regime = regime or Regime.for_params(p)
    settings = settings or SolverSettings()
    scheme = UpwindScheme(p, regime, frame_speed=field0.frame_speed, threads=threads)
    launches = list(launches) if launches is not None else default_launches(regime, p.eta, settings)
    dx = field0.dx

    try:
        scheme.check_state(field0.phi, field0.time)
        phi, t = field0.phi.copy(), field0.time
        k1, lam = scheme.rhs(phi, dx)
        tracer = LiveTracer(field0, launches, p, regime, scheme.normalization, lam)

        snapshots = SnapshotStore(settings.snapshot_stride, settings.snapshot_block)
        samples = StridedSeries(settings.snapshot_stride)
        dt_history: List[float] = []
        snapshots.offer(0, lambda: field0.at(phi.copy(), t))
        samples.offer(0, tracer.sample)

        step = 0
        stop = StopReason.TIMEOUT
        shock: Optional[Tuple[float, float]] = None
        while t < t_max * (1.0 - 1e-14):
            dt = min(scheme.stable_dt(lam, dx, settings.cfl), t_max - t)
            new = scheme.advance(phi, k1, dt, dx, t)
            k1_new, lam_new = scheme.rhs(new, dx)
            current = field0.at(new, t + dt)
            shock = tracer.advance(dt, current, lam_new, settings.rho_floor)
            phi, lam, k1, t = new, lam_new, k1_new, t + dt
            step += 1
            dt_history.append(dt)

            snapshots.offer(step, lambda: current)
            samples.offer(step, tracer.sample)
            if step % settings.log_every == 0:
                logger.info(
                    "Solver progress",
                    extra={"step": step, "t": t, "dt": dt, "min_rho1": tracer.min_rho(1)},
                )
            if shock is not None:
                stop = StopReason.SHOCK
                break

        final = field0.at(phi, t)
        snapshots.force(step, lambda: final)
        samples.force(step, tracer.sample)
    finally:
        scheme.close()

    run = Run(
        snapshots=list(snapshots.items),
        dt_history=dt_history,
        traces=tracer.collect(samples.items),
        stop_reason=stop,
        regime=regime.value,
        settings=settings,
        shock_time=shock[0] if shock else None,
        shock_position=shock[1] if shock else None,
        steps=step,
        snapshot_stride=snapshots.stride,
    )
    logger.info(
        "Run finished",
        extra={"regime": regime.value, "steps": step, "t": t, "stop_reason": stop.value},
    )
    return run
