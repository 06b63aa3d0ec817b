import math

import numpy as np
import pytest

from mhd_wavelab import (
    DomainError,
    IndexContractError,
    OracleConvergenceError,
    PhysParams,
    Regime,
    State,
    StencilError,
    boundedness_sweep,
    cancellation_sweep,
    coefficient_c,
    coefficient_gamma,
    coefficient_table,
    eigen_analytic,
    fast_self_interaction,
    fd_gamma_oracle,
    grad_lambda,
    sample_ball,
)
from mhd_wavelab.coefficients import coefficient_tables

MHD = PhysParams()
H1ZERO = PhysParams(H1=0.0)
GENERIC = State.from_components(u1=0.01, rho=1.01, H2=0.05, H3=0.03, S=-0.02)


class TestGradLambda:
    """Test eigenvalue gradients."""

    def test_entropy_family_is_e1(self):
        """Test grad(lambda_4) = e1."""
        np.testing.assert_array_equal(grad_lambda(4, State.zero(), H1ZERO), np.eye(7)[0])
        np.testing.assert_allclose(grad_lambda(4, GENERIC, MHD), np.eye(7)[0])

    @pytest.mark.parametrize("family", [1, 2, 3, 5, 6, 7])
    def test_matches_finite_differences(self, family):
        """Test analytic gradients against central differences of the eigenvalues."""
        h = 1e-6
        expected = np.zeros(7)
        for j in range(7):
            step = np.eye(7)[j] * h
            up = eigen_analytic(State.of(GENERIC.phi + step), MHD, Regime.MHD).lambdas[family - 1]
            down = eigen_analytic(State.of(GENERIC.phi - step), MHD, Regime.MHD).lambdas[family - 1]
            expected[j] = (up - down) / (2.0 * h)

        np.testing.assert_allclose(grad_lambda(family, GENERIC, MHD), expected, atol=1e-7)

    def test_no_transverse_velocity_dependence(self):
        """Test gradients never depend on u2 or u3."""
        for family in range(1, 8):
            g = grad_lambda(family, GENERIC, MHD)
            assert g[1] == 0.0 and g[2] == 0.0

    def test_family_out_of_range(self):
        """Test indices outside 1..n raise IndexContractError."""
        with pytest.raises(IndexContractError):
            grad_lambda(0, GENERIC, MHD)
        with pytest.raises(IndexContractError):
            grad_lambda(6, State.zero(), H1ZERO, Regime.EULER)


class TestFastSelfInteraction:
    """Test the genuinely nonlinear coefficient c^1_11."""

    def test_origin_without_longitudinal_field(self):
        """Test c^1_11(0) = -3/sqrt(2) for H1 = 0."""
        assert fast_self_interaction(State.zero(), H1ZERO) == pytest.approx(-3.0 / math.sqrt(2.0), abs=1e-10)

    def test_origin_mhd(self):
        """Test c^1_11(0) = (a - q)(gamma + 1) / (2c) with the default field."""
        expected = (0.01 - 2.0) * 3.0 / (2.0 * math.sqrt(2.0))

        assert fast_self_interaction(State.zero(), MHD) == pytest.approx(expected, abs=1e-10)
        assert expected == pytest.approx(-2.1107, abs=1e-4)

    def test_euler_origin(self):
        """Test the Euler value equals the H1 = 0 value."""
        value = fast_self_interaction(State.zero(), H1ZERO, Regime.EULER)

        assert value == pytest.approx(-3.0 / math.sqrt(2.0), abs=1e-10)

    def test_matches_coefficient_c(self):
        """Test c^1_11 agrees with the generic c coefficient."""
        assert fast_self_interaction(GENERIC, MHD) == pytest.approx(coefficient_c(1, 1, GENERIC, MHD), rel=1e-12)


class TestCoefficientC:
    """Test c^i_im identities."""

    def test_linearly_degenerate_families(self):
        """Test c^i_ii = 0 for the Alfven and entropy families."""
        for family in (2, 4, 6):
            assert coefficient_c(family, family, GENERIC, MHD) == pytest.approx(0.0, abs=1e-12)

    def test_alfven_columns_vanish(self):
        """Test c^i_i2 = c^i_i6 = 0 in the mhd regime."""
        table = coefficient_table(GENERIC, MHD)

        np.testing.assert_allclose(table.c[:, 1], 0.0, atol=1e-12)
        np.testing.assert_allclose(table.c[:, 5], 0.0, atol=1e-12)

    def test_index_contract(self):
        """Test out-of-range indices are rejected."""
        with pytest.raises(IndexContractError) as exc_info:
            coefficient_c(1, 8, GENERIC, MHD)

        assert exc_info.value.details["indices"] == [1, 8]


class TestCoefficientGamma:
    """Test gamma^i_km."""

    def test_index_contract(self):
        """Test k == m and m == i are rejected."""
        with pytest.raises(IndexContractError):
            coefficient_gamma(1, 2, 2, GENERIC, MHD)
        with pytest.raises(IndexContractError):
            coefficient_gamma(1, 2, 1, GENERIC, MHD)

    def test_rotational_entropy_coupling(self):
        """Test gamma^2_64 = -(lambda_6 - lambda_4) / (4 gamma), 0.0125 near the origin."""
        value = coefficient_gamma(2, 6, 4, State.from_components(H2=1e-3), MHD)

        assert value == pytest.approx(0.0125, abs=1e-7)

    def test_rotational_pair_vanishes(self):
        """Test gamma^2_26 = 0."""
        assert coefficient_gamma(2, 2, 6, GENERIC, MHD) == pytest.approx(0.0, abs=1e-10)

    def test_table_diagonal_is_zero(self):
        """Test the unused entries gamma^i_ki stay zero."""
        table = coefficient_table(GENERIC, MHD)

        for i in range(7):
            assert np.all(table.gamma[i, :, i] == 0.0)
        assert table.bound > 0 and np.isfinite(table.bound)

    @pytest.mark.parametrize("indices", [(1, 3, 5), (3, 3, 1), (7, 1, 2), (2, 2, 4), (5, 7, 6)])
    def test_against_finite_differences(self, indices):
        """Test complex-step coefficients against the Richardson oracle."""
        analytic = coefficient_gamma(*indices, GENERIC, MHD)
        oracle = fd_gamma_oracle(*indices, GENERIC, MHD)

        assert abs(analytic - oracle) <= 1e-5 * max(1.0, abs(analytic))

    def test_h1zero_against_finite_differences(self):
        """Test the H1 = 0 regime against the oracle."""
        state = State.from_components(rho=0.99, H2=0.04, H3=-0.02, S=0.01)
        analytic = coefficient_gamma(1, 5, 7, state, H1ZERO)
        oracle = fd_gamma_oracle(1, 5, 7, state, H1ZERO)

        assert abs(analytic - oracle) <= 1e-5 * max(1.0, abs(analytic))


class TestBatchTables:
    """Test the vectorised tables."""

    def test_matches_single_state(self):
        """Test each row of a batch equals the table of that state."""
        other = State.from_components(u1=-0.02, rho=0.98, H2=-0.04, H3=0.06, S=0.01)
        batch = coefficient_tables(np.stack([GENERIC.phi, other.phi]), MHD, Regime.MHD)

        for row, state in enumerate([GENERIC, other]):
            table = coefficient_table(state, MHD, Regime.MHD)
            np.testing.assert_allclose(batch.c[row], table.c, atol=1e-13)
            np.testing.assert_allclose(batch.gamma[row], table.gamma, atol=1e-13)

    def test_shapes(self):
        """Test a batch of n states has (n, 7, 7, 7) gamma entries."""
        batch = coefficient_tables(np.zeros((3, 7)) + GENERIC.phi, MHD, Regime.MHD)

        assert batch.lambdas.shape == (3, 7)
        assert batch.c.shape == (3, 7, 7)
        assert batch.gamma.shape == (3, 7, 7, 7)


class TestFiniteDifferenceOracle:
    """Test the oracle's own contract."""

    def test_step_out_of_range(self):
        """Test steps outside [1e-7, 1e-3] raise DomainError."""
        with pytest.raises(DomainError):
            fd_gamma_oracle(1, 3, 5, GENERIC, MHD, h=1e-2)

    def test_stencil_below_floor(self):
        """Test a stencil leaving the admissible set raises StencilError."""
        state = State.from_components(H2=0.01)

        with pytest.raises(StencilError) as exc_info:
            fd_gamma_oracle(1, 2, 3, state, MHD, h=1e-3, h_floor=0.9999e-4)

        assert exc_info.value.details["direction"] == 1

    def test_disagreement_raises(self):
        """Test estimates at h and h/2 that differ past the tolerance raise OracleConvergenceError."""
        with pytest.raises(OracleConvergenceError) as exc_info:
            fd_gamma_oracle(1, 3, 5, GENERIC, MHD, h=1e-3, tolerance=1e-14)

        assert exc_info.value.details["step"] == 1e-3
        assert exc_info.value.details["disagreement"] > 1e-14
        assert exc_info.value.exit_code == 15


class TestSampling:
    """Test fixed-seed samples of the ball."""

    def test_shape_and_radius(self):
        """Test samples lie in the sup-norm ball."""
        samples = sample_ball(MHD, 200, 0, Regime.MHD)

        assert samples.shape == (200, 7)
        assert np.max(np.abs(samples)) <= MHD.ball_radius

    def test_deterministic(self):
        """Test the same seed gives the same samples."""
        np.testing.assert_array_equal(sample_ball(MHD, 50, 4, Regime.MHD), sample_ball(MHD, 50, 4, Regime.MHD))

    def test_euler_drops_field(self):
        """Test Euler samples carry no transverse field."""
        samples = sample_ball(H1ZERO, 20, 0, Regime.EULER)

        assert np.all(samples[:, 4:6] == 0.0)

    def test_needs_samples(self):
        """Test zero samples raise DomainError."""
        with pytest.raises(DomainError):
            sample_ball(MHD, 0, 0, Regime.MHD)


class TestBoundednessSweep:
    """Test the sweep over the ball."""

    @pytest.mark.parametrize("regime, params", [(Regime.MHD, MHD), (Regime.H1ZERO, H1ZERO), (Regime.EULER, H1ZERO)])
    def test_identities_hold(self, regime, params):
        """Test no structural identity fails and c^1_11 stays negative."""
        report = boundedness_sweep(params, 300, regime=regime)

        assert report.failed == []
        assert report.identity_residuals["c11_max"] < 0
        assert np.isfinite(report.gamma_max)
        assert len(report.argmax_state) == 7

    def test_independent_of_threads(self):
        """Test the report does not depend on the worker count."""
        single = boundedness_sweep(MHD, 300, threads=1, chunk=100)
        pooled = boundedness_sweep(MHD, 300, threads=3, chunk=100)

        assert single == pooled


class TestCancellationSweep:
    """Test coefficients stay bounded as H_perp shrinks."""

    def test_bounded_towards_zero_field(self):
        """Test the peak does not blow up along H_perp = 1e-3 * 2^-k."""
        levels = cancellation_sweep(MHD, k_max=8, samples=4)

        assert [level.k for level in levels] == list(range(9))
        assert levels[-1].coefficient_max <= 10.0 * max(levels[0].coefficient_max, 1.0)
