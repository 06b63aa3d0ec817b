import math

import numpy as np
import pytest

from mhd_wavelab import DomainError, GeometryError, PhysParams, Regime, ShockTimeoutError
from mhd_wavelab.experiments import (
    InitialDataSpec,
    compute_norms,
    detect_shock,
    dz_rho1_bound,
    h1_diagnostic,
    lifespan_bounds,
    mean_value_holds,
    riccati_bound,
    run_shock_experiment,
    strip_geometry,
    strips_separated,
    vorticity_residuals,
)
from mhd_wavelab.experiments.shock import fit_shock_time, rho1_envelope
from mhd_wavelab.solver import CharTrace, Field, SolverSettings, simulate
from mhd_wavelab.state import U1, U2

EULER = PhysParams(H1=0.0)
SMALL = SolverSettings(nodes=128, traces_per_family=2, fast_traces=3)


def fan_trace(t, rho):
    n = len(t)
    return CharTrace(family=1, z=0.0, t=t, X=t, rho=rho, w=np.zeros(n), phi=np.zeros((n, 7)), dphi=np.zeros((n, 7)))


@pytest.fixture(scope="module")
def zero_run():
    return simulate(Field.uniform(-2.0, 2.0, 128), EULER, 0.5, Regime.EULER, settings=SMALL)


@pytest.fixture(scope="module")
def short_shock_run():
    settings = SolverSettings(nodes=512, traces_per_family=3, fast_traces=9)
    p = PhysParams()
    return run_shock_experiment(InitialDataSpec(), p, Regime.MHD, settings=settings, t_max=1e-3, require_shock=False)


class TestLifespanBounds:
    """Test the predicted lifespan window."""

    def test_brackets_leading_order(self):
        """Test T_lo < 1 / (|c11| W0) < T_hi."""
        T_lo, T_hi = lifespan_bounds(0.01, -3.0 / math.sqrt(2.0), 0.01)
        centre = 1.0 / (3.0 / math.sqrt(2.0) * 0.01)

        assert T_lo < centre < T_hi
        assert T_lo == pytest.approx(centre / 1.01**3)

    def test_rejects_zero_amplitude(self):
        """Test W0 must be positive."""
        with pytest.raises(DomainError):
            lifespan_bounds(0.0, -2.0, 0.01)

    def test_envelope_at_start(self):
        """Test both envelopes start at one."""
        lower, upper = rho1_envelope(0.0, 0.01, -2.0, 0.01)

        assert float(lower) == 1.0 and float(upper) == 1.0


class TestRiccatiBound:
    """Test the comparison bound."""

    def test_start(self):
        """Test the bound equals W0 at t = 0."""
        assert riccati_bound(0.01, 5.0, 0.0) == 0.01

    def test_doubles(self):
        """Test the bound is 2 W0 when Gamma W0 t = 1/2."""
        assert riccati_bound(0.01, 5.0, 10.0) == pytest.approx(0.02)

    def test_blow_up(self):
        """Test Gamma W0 t >= 1 raises DomainError."""
        with pytest.raises(DomainError):
            riccati_bound(0.01, 5.0, 20.0)


class TestFitShockTime:
    """Test the shock-time fit."""

    def test_linear_decay(self):
        """Test the zero of rho = 1 - t / 2 is found at t = 2."""
        t = np.linspace(0.0, 1.9, 40)
        trace = fan_trace(t, 1.0 - 0.5 * t)

        assert fit_shock_time(trace, 1e-3) == pytest.approx(2.0)

    def test_flat_trace(self):
        """Test a non-decreasing inverse density is rejected."""
        t = np.linspace(0.0, 1.0, 10)
        trace = fan_trace(t, np.ones(10))

        with pytest.raises(DomainError):
            fit_shock_time(trace, 1e-3)


class TestStripGeometry:
    """Test grouped strips."""

    def test_euler_groups(self):
        """Test the sampled gap and the separating time t0 = 4 eta / sigma."""
        geometry = strip_geometry(EULER, Regime.EULER, samples=500)

        assert geometry.groups == [[1], [2, 3, 4], [5]]
        assert geometry.sigma > 0.5
        assert geometry.t0 == pytest.approx(4.0 * EULER.eta / geometry.sigma)

    def test_outside_strip(self):
        """Test points far ahead of a strip are outside it."""
        geometry = strip_geometry(EULER, Regime.EULER, samples=500)

        assert geometry.outside_strip(10.0, 1.0, 1)
        assert not geometry.outside_strip(math.sqrt(2.0), 1.0, 1)

    def test_overlap_raises(self):
        """Test a ball too large to separate the strips raises GeometryError."""
        with pytest.raises(GeometryError):
            strip_geometry(EULER, Regime.EULER, samples=500, radius=0.9)

    def test_separation_in_time(self, zero_run):
        """Test the strips overlap at t = 0 and separate later on the zero field."""
        assert not strips_separated(zero_run, Regime.EULER, 0.0)
        assert strips_separated(zero_run, Regime.EULER, 0.5)


class TestNorms:
    """Test running-supremum norms."""

    def test_zero_field(self, zero_run):
        """Test the zero field has S = 1 and vanishing amplitudes."""
        norms = compute_norms(zero_run, EULER)

        assert norms.last("S") == 1.0
        assert norms.last("J") == 0.0
        assert norms.last("V") == 0.0
        assert norms.last("W") == 0.0
        assert set(norms.V_by_group) == {"1", "2bar", "5"}
        assert dz_rho1_bound(zero_run) == 0.0
        assert mean_value_holds(zero_run, 0.0)

    def test_initial_values(self, short_shock_run):
        """Test S = 1, J = W0 and V is negligible at t = 0."""
        W0 = short_shock_run.data.W0
        norms = compute_norms(short_shock_run.run, PhysParams(), t=0.0)

        assert norms.times == [0.0]
        assert norms.S == [1.0]
        assert norms.J[0] == pytest.approx(W0, rel=1e-2)
        assert norms.V[0] < 1e-6

    def test_ratios(self, short_shock_run):
        """Test the scaled ratios use the data amplitude."""
        norms = short_shock_run.norms
        ratios = norms.ratios(0.01, 0.1, short_shock_run.data.W0)

        assert ratios["S_max"] == norms.last("S")
        assert ratios["J_over_W0"] == pytest.approx(norms.last("J") / short_shock_run.data.W0)

    def test_analytic_field(self):
        """Test strip-restricted norms on u1 = b x exp(-x^2) and u2 = a exp(-x^2) at t = 0."""
        a, b = 0.01, 0.005
        field = Field.uniform(-2.0, 2.0, 129)
        phi = field.phi.copy()
        phi[:, U1] = b * field.x * np.exp(-field.x**2)
        phi[:, U2] = a * np.exp(-field.x**2)
        run = simulate(field.at(phi, 0.0), EULER, 0.05, Regime.EULER, settings=SMALL)

        norms = compute_norms(run, EULER, t=0.0)

        # strips start on the launch interval [-2 eta, 2 eta]; the steepest shear lies outside it
        assert norms.gradient_u1 == [pytest.approx(b, rel=1e-2)]
        assert norms.gradient_rho == [0.0]
        assert norms.V_by_group["2bar"] == [pytest.approx(a * math.sqrt(2.0) * math.exp(-0.5), rel=1e-2)]
        assert norms.W_check[0] < 0.5 * norms.V_by_group["2bar"][0]
        assert set(norms.W_check_prime) == {"5"}
        assert len(norms.W_check_prime["5"]) == 1

    def test_running_supremum(self, short_shock_run):
        """Test every grouped series is non-decreasing and sampled at the snapshot times."""
        norms = short_shock_run.norms
        series = [norms.gradient_u1, *norms.V_by_group.values(), *norms.W_check_prime.values()]

        assert set(norms.V_by_group) == {"1", "2bar", "4", "5bar", "7"}
        assert set(norms.W_check_prime) == {"4", "7"}
        for values in series:
            assert len(values) == len(norms.times)
            assert all(b >= a for a, b in zip(values[:-1], values[1:]))
        assert norms.gradient_u1[0] > 0.0


class TestShockExperiment:
    """Test shock detection."""

    def test_short_horizon_has_no_shock(self, short_shock_run):
        """Test a horizon far below T_lo produces no report when a shock is optional."""
        assert short_shock_run.report is None
        assert short_shock_run.T_bounds[0] > 1.0
        assert short_shock_run.c11_0 == pytest.approx(-2.1107, abs=1e-4)

    def test_timeout_raises(self):
        """Test a required shock that does not form raises ShockTimeoutError."""
        settings = SolverSettings(nodes=256, traces_per_family=2, fast_traces=3)

        with pytest.raises(ShockTimeoutError) as exc_info:
            run_shock_experiment(InitialDataSpec(), EULER, Regime.EULER, settings=settings, t_max=1e-3)

        assert exc_info.value.details["t_max"] == pytest.approx(1e-3)

    @pytest.mark.slow
    def test_lifespan_close_to_leading_order(self):
        """Test the measured T* is close to 1 / (|c11(0)| W0)."""
        p = PhysParams(H1=0.0, theta=0.04)
        spec = InitialDataSpec(theta=0.04, eta=0.1)
        settings = SolverSettings(nodes=1024, traces_per_family=3, fast_traces=33)

        outcome = run_shock_experiment(spec, p, Regime.H1ZERO, settings=settings, require_shock=False)

        assert outcome.report is not None
        scaled = outcome.report.T_star * abs(outcome.c11_0) * outcome.data.W0
        assert 0.8 < scaled < 1.25
        assert outcome.report.spurious_shock_free
        assert outcome.report.minimizing_family == 1

    @pytest.mark.slow
    def test_mhd_lifespan_in_window(self):
        """Test the MHD T* lands in the predicted window and rho_1 follows the two-sided envelope."""
        p = PhysParams(theta=0.02)
        spec = InitialDataSpec(theta=0.02, eta=0.1)
        settings = SolverSettings(nodes=512, traces_per_family=3, fast_traces=17)

        outcome = run_shock_experiment(spec, p, Regime.MHD, settings=settings, require_shock=False)

        report = outcome.report
        assert report is not None
        assert report.within_bounds
        assert report.T_lo * (1.0 - report.tolerance) <= report.T_star <= report.T_hi * (1.0 + report.tolerance)
        assert report.minimizing_family == 1
        assert report.spurious_shock_free

        # early stretch only; the grid stops resolving the front as rho_1 falls
        curve = np.array([pt for pt in report.rho1_curve if pt[0] <= 0.5 * report.T_lo])
        lower, upper = rho1_envelope(curve[:, 0], report.W0, report.c11_0, p.epsilon)
        assert np.all(curve[:, 1] >= lower - 0.02)
        assert np.all(curve[:, 1] <= upper + 0.02)

        gamma = abs(report.c11_0) * (1.0 + p.epsilon) ** 3
        for t, w_max in report.w1_max_curve:
            if t <= 0.5 * report.T_lo:
                assert w_max <= 1.1 * (1.0 + 2.0 * p.epsilon) * riccati_bound(report.W0, gamma, t)

    def test_detect_without_shock(self, short_shock_run):
        """Test detection on an unshocked run reports the minimal inverse density."""
        with pytest.raises(ShockTimeoutError) as exc_info:
            detect_shock(short_shock_run.run, short_shock_run.data, PhysParams(), Regime.MHD)

        assert exc_info.value.details["min_rho"] > 0.9


class TestH1Diagnostic:
    """Test the weighted L2 norm of w1 over the launch region."""

    def test_initial_values(self, short_shock_run):
        """Test both quadratures and the lower bound are finite and non-negative at t = 0."""
        diag = h1_diagnostic(short_shock_run.run, 0.0, PhysParams(), short_shock_run.data, region=(0.0, 0.2))

        assert diag.t == 0.0
        assert math.isfinite(diag.characteristic_value) and diag.characteristic_value >= 0.0
        assert math.isfinite(diag.grid_value) and diag.grid_value >= 0.0
        assert diag.mean_value_lower_bound >= 0.0

    def test_too_few_traces(self, short_shock_run):
        """Test a region holding fewer than three fan traces raises DomainError."""
        with pytest.raises(DomainError):
            h1_diagnostic(short_shock_run.run, 0.0, PhysParams(), short_shock_run.data, region=(0.3, 0.4))


class TestVorticity:
    """Test the Euler shear diagnostics."""

    def test_stationary_shear(self):
        """Test w2 = d_x u2 and u2 is carried unchanged by the shear traces."""
        field = Field.uniform(-2.0, 2.0, 128)
        phi = field.phi.copy()
        phi[:, 1] = 0.01 * np.exp(-10.0 * field.x**2)
        run = simulate(field.at(phi, 0.0), EULER, 0.3, Regime.EULER, settings=SMALL)

        residuals = vorticity_residuals(run, EULER)

        assert residuals["shear_identity"] < 1e-14
        assert residuals["shear_transport"] < 1e-12
